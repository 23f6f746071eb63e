use crate::error::{Error, Result};
use crate::robust::LossMatrixView;
use crate::scalar::Scalar;
use crate::submodular::set::{GroundSet, ItemSet};

/// Monotone submodular set function with values in `[0, 1]`.
///
/// Besides plain evaluation, implementors expose an incremental state so the
/// greedy oracle can compute marginal gains without re-evaluating from scratch.
pub trait SubmodularObjective<F> {
    type State: Clone;

    fn ground_size(&self) -> usize;

    fn value(&self, set: &ItemSet) -> F;

    fn empty_state(&self) -> Self::State;

    /// `f(S ∪ {item}) - f(S)` for the set `S` summarized by `state`.
    fn gain(&self, state: &Self::State, item: usize) -> F;

    fn insert(&self, state: &mut Self::State, item: usize);
}

/// Wraps a plain closure `S ↦ f(S)`; gains are computed by re-evaluation.
#[derive(Clone)]
pub struct SetFunction<G> {
    n: usize,
    f: G,
}

impl<G> SetFunction<G> {
    pub fn new(n: usize, f: G) -> Self {
        Self { n, f }
    }
}

impl<F, G> SubmodularObjective<F> for SetFunction<G>
where
    F: Scalar,
    G: Fn(&ItemSet) -> F,
{
    type State = ItemSet;

    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &ItemSet) -> F {
        (self.f)(set)
    }

    fn empty_state(&self) -> ItemSet {
        ItemSet::empty()
    }

    fn gain(&self, state: &ItemSet, item: usize) -> F {
        (self.f)(&state.with(item)) - (self.f)(state)
    }

    fn insert(&self, state: &mut ItemSet, item: usize) {
        state.insert(item);
    }
}

/// Views a list of submodular objectives as a reward family over item sets.
pub struct ObjectiveFamily<'a, O> {
    pub objectives: &'a [O],
}

impl<'a, O> ObjectiveFamily<'a, O> {
    pub fn new(objectives: &'a [O]) -> Self {
        Self { objectives }
    }
}

impl<F, O> LossMatrixView<ItemSet, F> for ObjectiveFamily<'_, O>
where
    O: SubmodularObjective<F>,
{
    fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    fn evaluate(&self, objective: usize, x: &ItemSet) -> F {
        self.objectives[objective].value(x)
    }
}

/// Outcome of [`check_monotone_submodular`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// `f(larger) < f(smaller)` although `smaller ⊂ larger`.
    NotMonotone { smaller: ItemSet, larger: ItemSet },
    /// `f(S ∪ T) + f(S ∩ T) > f(S) + f(T)`.
    NotSubmodular { s: ItemSet, t: ItemSet },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Largest ground set checked exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 12;

/// Exhaustively checks monotonicity and the lattice submodular inequality
/// over all subsets (and all pairs of subsets) of a ground set of at most
/// [`EXHAUSTIVE_LIMIT`] items. Returns the first violation found.
pub fn check_monotone_submodular<F, O>(objective: &O, ground: GroundSet) -> Result<Verdict>
where
    F: Scalar,
    O: SubmodularObjective<F> + ?Sized,
{
    if ground.n > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            n: ground.n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let tol = F::of(1e-9);
    let subsets = 1usize << ground.n;
    let values: Vec<F> = (0..subsets)
        .map(|mask| objective.value(&ItemSet::from_mask(mask as u64)))
        .collect();

    for mask in 0..subsets {
        for bit in 0..ground.n {
            let bigger = mask | 1 << bit;
            if bigger != mask && values[bigger] + tol < values[mask] {
                return Ok(Verdict::NotMonotone {
                    smaller: ItemSet::from_mask(mask as u64),
                    larger: ItemSet::from_mask(bigger as u64),
                });
            }
        }
    }
    for s in 0..subsets {
        for t in (s + 1)..subsets {
            if values[s | t] + values[s & t] > values[s] + values[t] + tol {
                return Ok(Verdict::NotSubmodular {
                    s: ItemSet::from_mask(s as u64),
                    t: ItemSet::from_mask(t as u64),
                });
            }
        }
    }
    Ok(Verdict::Pass)
}
