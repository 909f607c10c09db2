//! Basis of the span of an orbit `Sp(W^<U>)` with replayable witnesses.
//!
//! Starting from a maximal independent subset of the seeds `W`, candidates
//! `u(b)` are tried for every basis vector `b` and generator `u` until a full
//! pass adds nothing. Every accepted vector remembers which seed it came
//! from and the word of generator indices that produced it.

use std::collections::HashMap;

use serde::Serialize;

use crate::actions::Action;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::{EchelonBasis, Extension, FVector};

/// How a basis vector was produced: generators `word[0]`, `word[1]`, ...
/// applied in that order to seed `origin`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Witness {
    pub origin: usize,
    pub word: Vec<usize>,
}

impl Witness {
    /// Applies the word to `v`, first letter first.
    pub fn apply_word(&self, v: &FVector, gens: &[Action], ops: &mut u64) -> Result<FVector> {
        let mut cur = v.clone();
        for &j in &self.word {
            let g = gens.get(j).ok_or(Error::DimensionError {
                expected: gens.len(),
                got: j,
            })?;
            cur = g.apply_counted(&cur, ops)?;
        }
        Ok(cur)
    }

    /// Recomputes the witnessed vector from the seeds.
    pub fn replay(&self, seeds: &[FVector], gens: &[Action]) -> Result<FVector> {
        let seed = seeds.get(self.origin).ok_or(Error::DimensionError {
            expected: seeds.len(),
            got: self.origin,
        })?;
        self.apply_word(seed, gens, &mut 0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClosureStats {
    /// Outer passes, including the final one that adds nothing.
    pub passes: usize,
    /// Candidate vectors tested against the basis.
    pub candidates: usize,
    /// Field operations spent in elimination and in applying actions.
    pub ops: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClosureOptions {
    /// Generate candidates only from vectors added in the previous pass.
    pub frontier_only: bool,
    /// Print one line per accepted vector to standard error.
    pub trace: bool,
}

/// A basis of `Sp(W^<U>)`; `vectors[i]` is witnessed by `witnesses[i]`.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    vectors: Vec<FVector>,
    witnesses: Vec<Witness>,
    echelon: EchelonBasis,
    stats: ClosureStats,
}

/// One term `coeff * witness` of a decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    pub coeff: u32,
    pub witness: Witness,
}

pub fn span_closure(
    field: PrimeField,
    dim: usize,
    seeds: &[FVector],
    gens: &[Action],
) -> Result<SpanBasis> {
    span_closure_with(field, dim, seeds, gens, ClosureOptions::default())
}

pub fn span_closure_with(
    field: PrimeField,
    dim: usize,
    seeds: &[FVector],
    gens: &[Action],
    opts: ClosureOptions,
) -> Result<SpanBasis> {
    for g in gens {
        if let Some(d) = g.dim() {
            if d != dim {
                return Err(Error::DimensionError { expected: dim, got: d });
            }
        }
    }
    let mut basis = SpanBasis {
        vectors: Vec::new(),
        witnesses: Vec::new(),
        echelon: EchelonBasis::new(field, dim),
        stats: ClosureStats::default(),
    };
    let mut apply_ops = 0u64;
    for (origin, w) in seeds.iter().enumerate() {
        basis.stats.candidates += 1;
        if let Extension::Accepted { .. } = basis.echelon.extend(w)? {
            basis.push(w.clone(), Witness { origin, word: Vec::new() }, 0, opts.trace);
        }
    }
    let mut frontier_start = 0;
    loop {
        basis.stats.passes += 1;
        let pass = basis.stats.passes;
        assert!(pass <= dim + 1, "closure failed to stabilize");
        let snapshot_end = basis.vectors.len();
        let mut i = if opts.frontier_only { frontier_start } else { 0 };
        let mut added = false;
        loop {
            let end = if opts.frontier_only {
                snapshot_end
            } else {
                basis.vectors.len()
            };
            if i >= end || basis.vectors.len() == dim {
                break;
            }
            for (j, g) in gens.iter().enumerate() {
                let cand = g.apply_counted(&basis.vectors[i], &mut apply_ops)?;
                basis.stats.candidates += 1;
                if basis.echelon.extend(&cand)?.accepted() {
                    let mut word = basis.witnesses[i].word.clone();
                    word.push(j);
                    let witness = Witness {
                        origin: basis.witnesses[i].origin,
                        word,
                    };
                    basis.push(cand, witness, pass, opts.trace);
                    added = true;
                    if basis.vectors.len() == dim {
                        break;
                    }
                }
            }
            i += 1;
        }
        frontier_start = snapshot_end;
        // a full-rank span is trivially invariant
        if !added || basis.vectors.len() == dim {
            break;
        }
    }
    basis.stats.ops = basis.echelon.ops() + apply_ops;
    Ok(basis)
}

impl SpanBasis {
    fn push(&mut self, v: FVector, w: Witness, pass: usize, trace: bool) {
        if trace {
            eprintln!(
                "pass {pass} origin {} word {:?} rank {}",
                w.origin,
                w.word,
                self.vectors.len() + 1
            );
        }
        self.vectors.push(v);
        self.witnesses.push(w);
    }

    pub fn vectors(&self) -> &[FVector] {
        &self.vectors
    }

    pub fn witnesses(&self) -> &[Witness] {
        &self.witnesses
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.echelon.dim()
    }

    pub fn echelon(&self) -> &EchelonBasis {
        &self.echelon
    }

    /// Closure statistics; `ops` also includes later decompositions.
    pub fn stats(&self) -> ClosureStats {
        ClosureStats {
            ops: self.stats.ops.max(self.echelon.ops()),
            ..self.stats
        }
    }

    pub fn contains(&mut self, v: &FVector) -> Result<bool> {
        let before = self.echelon.ops();
        let r = self.echelon.contains(v);
        self.stats.ops += self.echelon.ops() - before;
        r
    }

    /// Writes `target` as a combination of witnessed basis vectors. Zero
    /// coefficients are dropped, so the zero vector gives an empty list.
    pub fn decompose(&mut self, target: &FVector) -> Result<Vec<Term>> {
        Ok(self
            .coefficients(target)?
            .into_iter()
            .zip(&self.witnesses)
            .filter(|(c, _)| *c != 0)
            .map(|(coeff, w)| Term {
                coeff,
                witness: w.clone(),
            })
            .collect())
    }

    /// Coefficients of `target` against every basis vector, zeros included.
    pub fn coefficients(&mut self, target: &FVector) -> Result<Vec<u32>> {
        let before = self.echelon.ops();
        let coeffs = self.echelon.decompose(target);
        self.stats.ops += self.echelon.ops() - before;
        coeffs
    }

    /// Applies every witness word to a replacement for its seed:
    /// `out[i] = word_i(replacements[origin_i])`. Each word extends the word
    /// of an earlier basis vector, so this costs one action per vector.
    pub fn replay_all(
        &self,
        replacements: &[FVector],
        gens: &[Action],
        ops: &mut u64,
    ) -> Result<Vec<FVector>> {
        let mut index: HashMap<(usize, &[usize]), usize> = HashMap::new();
        let mut out: Vec<FVector> = Vec::with_capacity(self.rank());
        for (i, w) in self.witnesses.iter().enumerate() {
            let v = match w.word.split_last() {
                None => replacements
                    .get(w.origin)
                    .ok_or(Error::DimensionError {
                        expected: w.origin + 1,
                        got: replacements.len(),
                    })?
                    .clone(),
                Some((&last, prefix)) => {
                    let parent = index[&(w.origin, prefix)];
                    gens.get(last)
                        .ok_or(Error::DimensionError {
                            expected: gens.len(),
                            got: last,
                        })?
                        .apply_counted(&out[parent], ops)?
                }
            };
            index.insert((w.origin, &w.word), i);
            out.push(v);
        }
        Ok(out)
    }

    /// Checks that each witness replays to its stored vector.
    pub fn verify_witnesses(&self, seeds: &[FVector], gens: &[Action]) -> Result<bool> {
        for (v, w) in self.vectors.iter().zip(&self.witnesses) {
            if &w.replay(seeds, gens)? != v {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Checks that `u(b)` stays in the span for every generator and basis vector.
    pub fn is_invariant(&self, gens: &[Action]) -> Result<bool> {
        let mut echelon = self.echelon.clone();
        for b in &self.vectors {
            for g in gens {
                if !echelon.contains(&g.apply(b)?)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::FMatrix;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn explicit(field: PrimeField, rows: &[Vec<i64>]) -> Action {
        Action::explicit(FMatrix::from_rows(field, rows).unwrap()).unwrap()
    }

    #[test]
    fn identity_action_keeps_seed() {
        let f5 = f(5);
        let v = FVector::from_i64s(f5, &[1, 2, 3]);
        let id = Action::explicit(FMatrix::identity(f5, 3)).unwrap();
        let b = span_closure(f5, 3, &[v.clone()], &[id]).unwrap();
        assert_eq!(b.vectors(), &[v]);
        assert_eq!(b.witnesses(), &[Witness { origin: 0, word: vec![] }]);
    }

    #[test]
    fn swap_orbit_f2() {
        let f2 = f(2);
        let swap = explicit(f2, &[vec![0, 1], vec![1, 0]]);
        let seeds = [FVector::from_i64s(f2, &[1, 0])];
        let mut b = span_closure(f2, 2, &seeds, &[swap]).unwrap();
        assert_eq!(
            b.vectors(),
            &[FVector::from_i64s(f2, &[1, 0]), FVector::from_i64s(f2, &[0, 1])]
        );
        assert_eq!(b.witnesses()[1].word, vec![0]);
        let terms = b.decompose(&FVector::from_i64s(f2, &[1, 1])).unwrap();
        assert_eq!(
            terms,
            vec![
                Term { coeff: 1, witness: Witness { origin: 0, word: vec![] } },
                Term { coeff: 1, witness: Witness { origin: 0, word: vec![0] } },
            ]
        );
        assert!(b.decompose(&FVector::zeros(f2, 2)).unwrap().is_empty());
        let single = b.decompose(&FVector::from_i64s(f2, &[0, 1])).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].coeff, 1);
    }

    #[test]
    fn invariant_line_f3() {
        let f3 = f(3);
        let diag = explicit(f3, &[vec![2, 0], vec![0, 1]]);
        let b = span_closure(f3, 2, &[FVector::from_i64s(f3, &[1, 0])], &[diag]).unwrap();
        assert_eq!(b.vectors(), &[FVector::from_i64s(f3, &[1, 0])]);
    }

    #[test]
    fn empty_inputs() {
        let f3 = f(3);
        let b = span_closure(f3, 2, &[], &[]).unwrap();
        assert_eq!(b.rank(), 0);
        let seeds = [FVector::from_i64s(f3, &[1, 0]), FVector::from_i64s(f3, &[2, 0])];
        let b = span_closure(f3, 2, &seeds, &[]).unwrap();
        assert_eq!(b.rank(), 1);
    }

    #[test]
    fn not_in_span_is_reported() {
        let f3 = f(3);
        let mut b = span_closure(f3, 2, &[FVector::from_i64s(f3, &[1, 0])], &[]).unwrap();
        assert_eq!(
            b.decompose(&FVector::from_i64s(f3, &[0, 1])),
            Err(Error::NotInSpan)
        );
    }

    #[test]
    fn frontier_mode_matches_full_mode() {
        let f5 = f(5);
        let a = explicit(
            f5,
            &[vec![0, 0, 0, 1], vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0]],
        );
        let seeds = [FVector::from_i64s(f5, &[1, 1, 0, 0])];
        let full = span_closure(f5, 4, &seeds, &[a.clone()]).unwrap();
        let frontier = span_closure_with(
            f5,
            4,
            &seeds,
            &[a.clone()],
            ClosureOptions { frontier_only: true, trace: false },
        )
        .unwrap();
        assert_eq!(full.rank(), frontier.rank());
        let mut e = full.echelon().clone();
        for v in frontier.vectors() {
            assert!(e.contains(v).unwrap());
        }
        assert!(full.verify_witnesses(&seeds, &[a.clone()]).unwrap());
        let replayed = full.replay_all(&seeds, &[a.clone()], &mut 0).unwrap();
        assert_eq!(replayed, full.vectors());
        assert!(frontier.is_invariant(&[a]).unwrap());
    }
}
