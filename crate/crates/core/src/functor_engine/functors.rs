//! Functor elements in canonical form and the built-in functors.

use std::cmp::Ordering;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

/// An element of `FX` for one of the built-in functors.
///
/// Sets are sorted and duplicate-free; the empty set is always [`Element::Empty`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Element {
    Empty,
    Set(Vec<usize>),
    Tuple(Vec<usize>),
}

impl Element {
    /// Canonical set element.
    pub fn set<I: IntoIterator<Item = usize>>(items: I) -> Element {
        let mut v: Vec<usize> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            Element::Empty
        } else {
            Element::Set(v)
        }
    }

    pub fn tuple<I: IntoIterator<Item = usize>>(items: I) -> Element {
        Element::Tuple(items.into_iter().collect())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Element::Empty => "empty",
            Element::Set(_) => "set",
            Element::Tuple(_) => "tuple",
        }
    }

    pub fn indices(&self) -> &[usize] {
        match self {
            Element::Empty => &[],
            Element::Set(v) | Element::Tuple(v) => v,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Element::Empty => 0,
            Element::Set(_) => 1,
            Element::Tuple(_) => 2,
        }
    }
}

/// Serialized as `{"kind": …, "indices": […]}`.
impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Element", 2)?;
        st.serialize_field("kind", self.kind())?;
        st.serialize_field("indices", self.indices())?;
        st.end()
    }
}

/// Canonical order: empty, then sets, then tuples; by size, then lexicographically.
impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.rank(), self.indices().len(), self.indices()).cmp(&(other.rank(), other.indices().len(), other.indices()))
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self.indices().iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        match self {
            Element::Empty => f.write_str("∅"),
            Element::Set(_) => write!(f, "{{{body}}}"),
            Element::Tuple(_) => write!(f, "({body})"),
        }
    }
}

/// A finitary functor of finite degree, given by its action on finite sets.
pub trait Functor: Sync {
    fn name(&self) -> String;
    fn degree(&self) -> usize;
    /// All elements of `F(n)` for `n = {0, …, n-1}`, in canonical order.
    fn carrier(&self, n: usize) -> Vec<Element>;
    /// `Ff(e)` for a map `f` given as the table `i ↦ f[i]`.
    fn map(&self, e: &Element, f: &[usize]) -> Element;
    /// `supp(e)`, sorted.
    fn support(&self, e: &Element) -> Vec<usize>;
    /// Whether `e` is an element of `F(n)`.
    fn contains(&self, e: &Element, n: usize) -> bool;
    /// `supp(Ff(a)) = f[supp(a)]` for all maps `f`.
    fn preserves_supports(&self) -> bool;
    /// `|F1| = 1`.
    fn preserves_singletons(&self) -> bool {
        self.carrier(1).len() == 1
    }
}

/// The functors shipped with the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinFunctor {
    /// `X ↦ X^k`.
    Power(usize),
    /// Subsets of size at most `k`, including `∅`.
    CappedHyperspace(usize),
    /// Subsets of size 1 or 2.
    NonemptyPairs,
    /// `∅` and two-element sets, with `Ff({x,y}) = {f(x)} △ {f(y)}`.
    SymDiffPairs,
}

impl BuiltinFunctor {
    /// Parses names such as `power`, `PowerFunctor(2)`, `hyperspace`,
    /// `nonempty-pairs` or `symdiff`. `degree` fills in `k` when the name
    /// carries none.
    pub fn parse(name: &str, degree: Option<usize>) -> Result<BuiltinFunctor, String> {
        let lower = name.trim().to_ascii_lowercase();
        let (head, arg) = match lower.split_once('(') {
            Some((h, rest)) => {
                let k = rest.trim_end_matches(')').trim().parse::<usize>().map_err(|e| format!("bad degree in {name:?}: {e}"))?;
                (h.to_string(), Some(k))
            }
            None => (lower.clone(), None),
        };
        let head: String = head.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        let k = arg.or(degree);
        let need = |k: Option<usize>| k.ok_or_else(|| format!("functor {name:?} needs a degree"));
        match head.as_str() {
            "power" | "powerfunctor" => Ok(BuiltinFunctor::Power(need(k)?)),
            "hyperspace" | "cappedhyperspace" | "hk" => Ok(BuiltinFunctor::CappedHyperspace(need(k)?)),
            "nonemptypairs" | "pairs" => Ok(BuiltinFunctor::NonemptyPairs),
            "symdiffpairs" | "symdiff" => Ok(BuiltinFunctor::SymDiffPairs),
            _ => Err(format!("unknown functor {name:?}")),
        }
    }
}

fn subsets_up_to(n: usize, min: usize, max: usize) -> Vec<Element> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == max {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, max, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(0, n, max, &mut cur, &mut raw);
    for s in raw {
        if s.len() >= min {
            out.push(Element::set(s));
        }
    }
    out.sort();
    out
}

fn all_tuples(n: usize, k: usize) -> Vec<Element> {
    let total = n.checked_pow(k as u32).unwrap_or(usize::MAX);
    let mut out = Vec::with_capacity(total.min(1 << 20));
    let mut t = vec![0usize; k];
    if n == 0 && k > 0 {
        return out;
    }
    loop {
        out.push(Element::Tuple(t.clone()));
        let mut i = k;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < n {
                break;
            }
            t[i] = 0;
        }
    }
}

impl Functor for BuiltinFunctor {
    fn name(&self) -> String {
        match self {
            BuiltinFunctor::Power(k) => format!("PowerFunctor({k})"),
            BuiltinFunctor::CappedHyperspace(k) => format!("CappedHyperspace({k})"),
            BuiltinFunctor::NonemptyPairs => "NonemptyPairs".into(),
            BuiltinFunctor::SymDiffPairs => "SymDiffPairs".into(),
        }
    }

    fn degree(&self) -> usize {
        match self {
            BuiltinFunctor::Power(k) | BuiltinFunctor::CappedHyperspace(k) => *k,
            BuiltinFunctor::NonemptyPairs | BuiltinFunctor::SymDiffPairs => 2,
        }
    }

    fn carrier(&self, n: usize) -> Vec<Element> {
        match self {
            BuiltinFunctor::Power(k) => all_tuples(n, *k),
            BuiltinFunctor::CappedHyperspace(k) => subsets_up_to(n, 0, *k),
            BuiltinFunctor::NonemptyPairs => subsets_up_to(n, 1, 2),
            BuiltinFunctor::SymDiffPairs => {
                let mut v = subsets_up_to(n, 0, 2);
                v.retain(|e| e.indices().len() != 1);
                v
            }
        }
    }

    fn map(&self, e: &Element, f: &[usize]) -> Element {
        match (self, e) {
            (_, Element::Empty) => Element::Empty,
            (BuiltinFunctor::Power(_), Element::Tuple(t)) => Element::Tuple(t.iter().map(|&i| f[i]).collect()),
            (BuiltinFunctor::SymDiffPairs, Element::Set(s)) => {
                let (u, v) = (f[s[0]], f[s[1]]);
                if u == v {
                    Element::Empty
                } else {
                    Element::set([u, v])
                }
            }
            (_, Element::Set(s)) => Element::set(s.iter().map(|&i| f[i])),
            (_, other) => panic!("{other} is not an element of {}", self.name()),
        }
    }

    fn support(&self, e: &Element) -> Vec<usize> {
        let mut v = e.indices().to_vec();
        v.sort_unstable();
        v.dedup();
        v
    }

    fn contains(&self, e: &Element, n: usize) -> bool {
        let in_range = e.indices().iter().all(|&i| i < n);
        let len = e.indices().len();
        in_range
            && match (self, e) {
                (BuiltinFunctor::Power(k), Element::Tuple(t)) => t.len() == *k,
                (BuiltinFunctor::CappedHyperspace(_), Element::Empty) => true,
                (BuiltinFunctor::CappedHyperspace(k), Element::Set(_)) => len <= *k,
                (BuiltinFunctor::NonemptyPairs, Element::Set(_)) => len <= 2,
                (BuiltinFunctor::SymDiffPairs, Element::Empty) => true,
                (BuiltinFunctor::SymDiffPairs, Element::Set(_)) => len == 2,
                _ => false,
            }
    }

    fn preserves_supports(&self) -> bool {
        !matches!(self, BuiltinFunctor::SymDiffPairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carrier_sizes() {
        assert_eq!(BuiltinFunctor::CappedHyperspace(2).carrier(2).len(), 4);
        assert_eq!(BuiltinFunctor::NonemptyPairs.carrier(2).len(), 3);
        assert_eq!(BuiltinFunctor::SymDiffPairs.carrier(2).len(), 2);
        assert_eq!(BuiltinFunctor::Power(2).carrier(2).len(), 4);
        assert_eq!(BuiltinFunctor::Power(3).carrier(2).len(), 8);
        assert_eq!(BuiltinFunctor::CappedHyperspace(2).carrier(3).len(), 7);
        assert_eq!(BuiltinFunctor::Power(0).carrier(3), vec![Element::Tuple(vec![])]);
    }

    #[test]
    fn canonical_order_is_by_size() {
        let c = BuiltinFunctor::CappedHyperspace(2).carrier(2);
        assert_eq!(c, vec![Element::Empty, Element::set([0]), Element::set([1]), Element::set([0, 1])]);
    }

    #[test]
    fn symdiff_collapses_pairs() {
        let f = BuiltinFunctor::SymDiffPairs;
        let pair = Element::set([0, 1]);
        assert_eq!(f.map(&pair, &[3, 3]), Element::Empty);
        assert_eq!(f.map(&pair, &[4, 2]), Element::set([2, 4]));
        assert!(!f.preserves_supports());
        assert!(f.preserves_singletons());
    }

    #[test]
    fn singleton_flags() {
        assert!(BuiltinFunctor::Power(2).preserves_singletons());
        assert!(BuiltinFunctor::NonemptyPairs.preserves_singletons());
        assert!(!BuiltinFunctor::CappedHyperspace(2).preserves_singletons());
    }

    #[test]
    fn apply_respects_composition() {
        // apply(a, f∘h) = apply(Fh(a), f) for all self-maps h of n.
        for functor in [
            BuiltinFunctor::Power(2),
            BuiltinFunctor::CappedHyperspace(2),
            BuiltinFunctor::NonemptyPairs,
            BuiltinFunctor::SymDiffPairs,
        ] {
            let f = [5usize, 7];
            for a in functor.carrier(2) {
                for h in [[0usize, 0], [0, 1], [1, 0], [1, 1]] {
                    let fh: Vec<usize> = h.iter().map(|&i| f[i]).collect();
                    assert_eq!(functor.map(&a, &fh), functor.map(&functor.map(&a, &h), &f));
                }
            }
        }
    }

    #[test]
    fn parsing_names() {
        assert_eq!(BuiltinFunctor::parse("PowerFunctor(2)", None), Ok(BuiltinFunctor::Power(2)));
        assert_eq!(BuiltinFunctor::parse("hyperspace", Some(3)), Ok(BuiltinFunctor::CappedHyperspace(3)));
        assert_eq!(BuiltinFunctor::parse("nonempty-pairs", None), Ok(BuiltinFunctor::NonemptyPairs));
        assert!(BuiltinFunctor::parse("power", None).is_err());
        assert!(BuiltinFunctor::parse("frobnicate", Some(2)).is_err());
    }
}
