//! Diagonal body masks for incremental matching.

use crate::syntax::{Atom, CBody, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MaskTag {
    /// Match against the graph before the update.
    Base,
    /// Match against the update's additions only.
    Delta,
    /// Match against both.
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MaskedBody {
    pub lits: Vec<(MaskTag, Literal)>,
}

impl MaskedBody {
    pub fn tags(&self) -> Vec<MaskTag> {
        self.lits.iter().map(|(m, _)| *m).collect()
    }

    /// Position of the `Delta` literal.
    pub fn delta_position(&self) -> Option<usize> {
        self.lits.iter().position(|(m, _)| *m == MaskTag::Delta)
    }
}

/// Which side of the diagonal reads the old graph.
///
/// Both orders cover every combination of old and new facts exactly once
/// when unioned over rows; they differ in which row a given derivation
/// lands in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskOrder {
    /// Rows `[D,F,F]`, `[B,D,F]`, `[B,B,D]`.
    #[default]
    BaseBeforeDelta,
    /// Rows `[D,B,B]`, `[F,D,B]`, `[F,F,D]`.
    BaseAfterDelta,
}

pub fn body_mask(body: &CBody) -> Vec<MaskedBody> {
    body_mask_with(body, MaskOrder::default())
}

/// One row per relational literal. Equalities are `Full` in every row and
/// never sit on the diagonal.
pub fn body_mask_with(body: &CBody, order: MaskOrder) -> Vec<MaskedBody> {
    use std::cmp::Ordering::*;
    (0..body.rel_count())
        .map(|row| {
            let mut k = 0;
            let lits = body
                .lits
                .iter()
                .map(|l| {
                    let tag = match l.atom {
                        Atom::Eq(..) => MaskTag::Full,
                        Atom::Rel(..) => {
                            k += 1;
                            match ((k - 1).cmp(&row), order) {
                                (Equal, _) => MaskTag::Delta,
                                (Less, MaskOrder::BaseBeforeDelta) | (Greater, MaskOrder::BaseAfterDelta) => MaskTag::Base,
                                (Less, MaskOrder::BaseAfterDelta) | (Greater, MaskOrder::BaseBeforeDelta) => MaskTag::Full,
                            }
                        }
                    };
                    (tag, l.clone())
                })
                .collect();
            MaskedBody { lits }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Symbol, Term};
    use MaskTag::*;

    fn rel(s: &str) -> Literal {
        Literal::rel(Symbol::new(s).unwrap(), Term::Var(0), Term::Var(1))
    }

    #[test]
    fn matrix_shapes() {
        let one = CBody::new(vec![rel("a")]);
        assert_eq!(body_mask(&one).iter().map(MaskedBody::tags).collect::<Vec<_>>(), vec![vec![Delta]]);

        let three = CBody::new(vec![rel("a"), rel("b"), rel("c")]);
        let rows: Vec<_> = body_mask(&three).iter().map(MaskedBody::tags).collect();
        assert_eq!(rows, vec![vec![Delta, Full, Full], vec![Base, Delta, Full], vec![Base, Base, Delta]]);
        let rows: Vec<_> = body_mask_with(&three, MaskOrder::BaseAfterDelta).iter().map(MaskedBody::tags).collect();
        assert_eq!(rows, vec![vec![Delta, Base, Base], vec![Full, Delta, Base], vec![Full, Full, Delta]]);
    }

    #[test]
    fn equalities_stay_off_the_diagonal() {
        let body = CBody::new(vec![rel("a"), Literal::eq(Term::Var(1), Term::Var(2)), rel("b")]);
        let rows: Vec<_> = body_mask(&body).iter().map(MaskedBody::tags).collect();
        assert_eq!(rows, vec![vec![Delta, Full, Full], vec![Base, Full, Delta]]);
        assert!(body_mask(&CBody::new(vec![Literal::eq(Term::Var(0), Term::Var(1))])).is_empty());
    }

    #[test]
    fn duplicate_literals_get_distinct_rows() {
        let body = CBody::new(vec![rel("a"), rel("a")]);
        let rows: Vec<_> = body_mask(&body).iter().map(|r| r.delta_position()).collect();
        assert_eq!(rows, vec![Some(0), Some(1)]);
    }
}
