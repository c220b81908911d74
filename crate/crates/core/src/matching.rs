//! Incremental matching of the query against a growing pattern.
//!
//! The state is the greedy earliest embedding of the query into the pattern:
//! `imatch` query itemsets are fully matched, and `iimatch` items of the next
//! one are matched inside the pattern's last itemset. `frozen` is set when a
//! query itemset completes inside the last pattern itemset; later I-extensions
//! of that itemset must not match the next query itemset, since it belongs to
//! a later position.

use crate::model::{Item, QuerySequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MatchState {
    pub imatch: usize,
    pub iimatch: usize,
    pub frozen: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionKind {
    /// First item of a pattern.
    Prefix,
    SStep,
    IStep,
}

/// How the feasibility count compares the query item's position with the
/// pattern's earliest end position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    /// The query item must occur after that position.
    Strict,
    /// It may also occur at that position (the last itemset can still absorb it).
    NonStrict,
    /// The query is matched; nothing to check.
    NoCheck,
}

impl Strictness {
    pub fn is_strict(self) -> Option<bool> {
        match self {
            Strictness::Strict => Some(true),
            Strictness::NonStrict => Some(false),
            Strictness::NoCheck => None,
        }
    }
}

impl MatchState {
    pub const fn initial() -> Self {
        MatchState { imatch: 0, iimatch: 0, frozen: false }
    }

    pub fn is_matched(&self, qs: &QuerySequence) -> bool {
        self.imatch >= qs.size()
    }

    /// The next query item to match, or `None` once the query is matched.
    pub fn current_query_item(&self, qs: &QuerySequence) -> Option<Item> {
        qs.itemsets().get(self.imatch).map(|x| x.items()[self.iimatch])
    }

    /// State after extending the pattern by `e`.
    pub fn advance(self, kind: ExtensionKind, e: Item, qs: &QuerySequence) -> MatchState {
        if self.is_matched(qs) {
            return self;
        }
        let mut st = self;
        match kind {
            ExtensionKind::Prefix | ExtensionKind::SStep => {
                st.frozen = false;
                st.iimatch = 0;
            }
            ExtensionKind::IStep if st.frozen => return st,
            ExtensionKind::IStep => {}
        }
        let target = &qs.itemsets()[st.imatch];
        let qi = target.items()[st.iimatch];
        if e == qi {
            st.iimatch += 1;
            if st.iimatch == target.len() {
                st.imatch += 1;
                st.iimatch = 0;
                st.frozen = true;
            }
        } else if e > qi {
            // qi can no longer join this itemset; restart the query itemset
            st.iimatch = 0;
        }
        st
    }

    /// Comparison mode for the feasibility check after extending by `e`.
    pub fn strictness(&self, e: Item, qs: &QuerySequence) -> Strictness {
        let Some(qi) = self.current_query_item(qs) else {
            return Strictness::NoCheck;
        };
        if self.frozen {
            Strictness::Strict
        } else if self.iimatch > 0 || qi > e {
            Strictness::NonStrict
        } else {
            Strictness::Strict
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::containment::{contains_itemsets, naive_support};
    use crate::fixtures::*;
    use crate::model::{Itemset, Pattern};
    use proptest::prelude::*;
    use ExtensionKind::*;

    fn q(raw: &[&[u32]]) -> QuerySequence {
        QuerySequence::new(raw.iter().map(|x| Itemset::new(crate::spmf::items(x)).unwrap()).collect())
    }

    fn st(imatch: usize, iimatch: usize, frozen: bool) -> MatchState {
        MatchState { imatch, iimatch, frozen }
    }

    #[test]
    fn initial_state() {
        assert_eq!(MatchState::initial(), st(0, 0, false));
        assert!(MatchState::initial().is_matched(&QuerySequence::empty()));
        assert_eq!(MatchState::initial().current_query_item(&q(&[&[A], &[B]])), Some(item(A)));
    }

    #[test]
    fn current_query_item() {
        assert_eq!(st(1, 0, false).current_query_item(&q(&[&[G], &[A, D]])), Some(item(A)));
        assert_eq!(st(1, 1, false).current_query_item(&q(&[&[G], &[A, C], &[B]])), Some(item(C)));
        assert_eq!(st(2, 0, false).current_query_item(&q(&[&[A], &[B]])), None);
    }

    #[test]
    fn current_item_after_g_then_b() {
        // pattern <(g),(b)> against <(g),(a,d)> matches only (g)
        let qs = q(&[&[G], &[A, D]]);
        let s = MatchState::initial().advance(Prefix, item(G), &qs).advance(SStep, item(B), &qs);
        assert_eq!((s.imatch, s.iimatch), (1, 0));
        assert_eq!(s.current_query_item(&qs), Some(item(A)));
    }

    #[test]
    fn frozen_blocks_matching_inside_the_same_itemset() {
        let qs = q(&[&[A], &[B, C], &[E]]);
        let s = MatchState::initial()
            .advance(Prefix, item(A), &qs)
            .advance(SStep, item(B), &qs)
            .advance(IStep, item(C), &qs);
        assert_eq!(s, st(2, 0, true));
        assert_eq!(s.advance(IStep, item(E), &qs), s);
        assert_eq!(s.advance(SStep, item(E), &qs), st(3, 0, true));
    }

    #[test]
    fn larger_item_resets_itemset_match() {
        let qs = q(&[&[G], &[A, C], &[B]]);
        assert_eq!(st(1, 1, false).advance(IStep, item(D), &qs), st(1, 0, false));
        assert_eq!(st(1, 1, false).advance(IStep, item(B), &qs), st(1, 1, false));
    }

    #[test]
    fn s_step_completes_query() {
        let qs = q(&[&[A], &[B]]);
        let s = st(1, 0, true).advance(SStep, item(B), &qs);
        assert!(s.is_matched(&qs));
        assert_eq!(s.imatch, 2);
        // terminal states never change
        assert_eq!(s.advance(SStep, item(A), &qs), s);
        assert_eq!(s.advance(IStep, item(G), &qs), s);

        let chain = MatchState::initial()
            .advance(Prefix, item(G), &qs)
            .advance(SStep, item(A), &qs)
            .advance(SStep, item(B), &qs);
        assert!(chain.is_matched(&qs));
    }

    #[test]
    fn strictness_cases() {
        let ab = q(&[&[A], &[B]]);
        let after_f = MatchState::initial().advance(Prefix, item(F), &ab);
        assert_eq!(after_f.strictness(item(F), &ab), Strictness::Strict);

        let gacb = q(&[&[G], &[A, C], &[B]]);
        let ga = MatchState::initial().advance(Prefix, item(G), &gacb).advance(SStep, item(A), &gacb);
        let gab = ga.advance(IStep, item(B), &gacb);
        assert_eq!(gab.iimatch, 1);
        assert_eq!(gab.strictness(item(B), &gacb), Strictness::NonStrict);
        let gac = ga.advance(IStep, item(C), &gacb);
        assert_eq!(gac, st(2, 0, true));
        assert_eq!(gac.current_query_item(&gacb), Some(item(B)));
        assert_eq!(gac.strictness(item(C), &gacb), Strictness::Strict);
        let gad = ga.advance(IStep, item(D), &gacb);
        assert_eq!(gad.current_query_item(&gacb), Some(item(A)));
        assert_eq!(gad.strictness(item(D), &gacb), Strictness::Strict);

        // the last itemset may still absorb a larger query item
        let bc = q(&[&[B, C]]);
        let a = MatchState::initial().advance(Prefix, item(A), &bc);
        assert_eq!(a.strictness(item(A), &bc), Strictness::NonStrict);

        let done = st(2, 0, true);
        assert_eq!(done.strictness(item(A), &ab), Strictness::NoCheck);
    }

    /// Walks every extension chain over `alphabet` up to `depth` items and
    /// checks the state against direct containment.
    fn check_all_chains(qs: &QuerySequence, alphabet: u32, depth: usize) {
        fn go(p: &Pattern, s: MatchState, qs: &QuerySequence, alphabet: u32, depth: usize) {
            assert_eq!(
                s.is_matched(qs),
                contains_itemsets(p.itemsets(), qs.itemsets()),
                "pattern {p} query {qs} state {s:?}"
            );
            if depth == 0 {
                return;
            }
            for id in 1..=alphabet {
                let e = item(id);
                let kind = if p.is_empty() { Prefix } else { SStep };
                go(&p.s_extend(e), s.advance(kind, e, qs), qs, alphabet, depth - 1);
                if let Ok(ip) = p.i_extend(e) {
                    go(&ip, s.advance(IStep, e, qs), qs, alphabet, depth - 1);
                }
            }
        }
        go(&Pattern::empty(), MatchState::initial(), qs, alphabet, depth);
    }

    #[test]
    fn matched_iff_contained_for_all_short_patterns() {
        for qs in [
            q(&[&[A], &[B]]),
            q(&[&[A, B]]),
            q(&[&[A], &[B, C], &[A]]),
            q(&[&[A, B], &[A, B]]),
            q(&[&[B], &[B]]),
            q(&[&[A, C]]),
            q(&[&[C], &[A, B, C]]),
        ] {
            check_all_chains(&qs, 3, 5);
        }
    }

    fn arb_query() -> impl Strategy<Value = QuerySequence> {
        prop::collection::vec(prop::collection::btree_set(1u32..=4, 1..=3), 0..=3).prop_map(|v| {
            QuerySequence::new(
                v.into_iter()
                    .map(|s| Itemset::new(crate::spmf::items(&s.into_iter().collect::<Vec<_>>())).unwrap())
                    .collect(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_queries_track_containment(qs in arb_query()) {
            check_all_chains(&qs, 4, 4);
        }

        #[test]
        fn imatch_never_decreases(qs in arb_query(), steps in prop::collection::vec((any::<bool>(), 1u32..=4), 1..8)) {
            let mut s = MatchState::initial();
            let mut first = true;
            for (s_ext, id) in steps {
                let kind = if first { Prefix } else if s_ext { SStep } else { IStep };
                first = false;
                let next = s.advance(kind, item(id), &qs);
                prop_assert!(next.imatch >= s.imatch);
                if s.is_matched(&qs) {
                    prop_assert_eq!(next, s);
                }
                if !next.is_matched(&qs) {
                    prop_assert!(next.iimatch < qs.itemsets()[next.imatch].len());
                }
                s = next;
            }
        }
    }

    #[test]
    fn support_fixture_sanity() {
        // <(a),(b),(f)> used in the UPIP discussion
        let p = Pattern::new(vec![
            Itemset::new(vec![item(A)]).unwrap(),
            Itemset::new(vec![item(B)]).unwrap(),
            Itemset::new(vec![item(F)]).unwrap(),
        ]);
        assert_eq!(naive_support(&table1(), p.itemsets()), 2);
    }
}
