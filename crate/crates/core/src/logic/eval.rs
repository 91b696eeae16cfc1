use std::collections::HashMap;
use std::sync::Arc;

use super::program::GroundProgram;
use super::strata::{find_stratification, Stratification};
use super::{Interpretation, LogicError, MAX_EXHAUSTIVE_ATOMS};
use crate::dyadic::Dyadic;
use crate::iteration::DecomposedOperator;
use crate::ultrametric::{
    classify_indexed, ContractionClass, ContractionWitness, FiniteUltrametricSpace,
};

/// `T_P(I)`: heads of clauses whose bodies hold in `I`.
pub fn immediate_consequence(program: &GroundProgram, i: Interpretation) -> Interpretation {
    let mut out = Interpretation::EMPTY;
    for c in program.clauses() {
        if c.body.iter().all(|l| i.contains(l.atom) != l.negated) {
            out.insert(c.head);
        }
    }
    out
}

/// `2^-s` with `s` the least level in `I △ J`, or 0 when `I = J`.
pub fn interpretation_distance(
    strat: &Stratification,
    i: Interpretation,
    j: Interpretation,
) -> Dyadic {
    match i
        .symmetric_difference(j)
        .iter()
        .map(|a| strat.level(a))
        .min()
    {
        None => Dyadic::Zero,
        Some(s) => Dyadic::InvPow2(s),
    }
}

/// The unrepaired reading: the least level in `I △ J` itself (0 when equal).
///
/// Not an ultrametric once two interpretations differ at level 0; kept for
/// comparison against [`interpretation_distance`].
pub fn literal_interpretation_distance(
    strat: &Stratification,
    i: Interpretation,
    j: Interpretation,
) -> u32 {
    i.symmetric_difference(j)
        .iter()
        .map(|a| strat.level(a))
        .min()
        .unwrap_or(0)
}

/// The stratification named by the program's pragma, else the minimal one.
pub fn stratification(program: &GroundProgram) -> Result<Stratification, LogicError> {
    match program.declared_strata() {
        Some(levels) => Stratification::new(program, levels.to_vec()).map_err(|v| {
            LogicError::BadStrata(format!(
                "clause {} puts {} at or below {}{}",
                v.clause + 1,
                program.atoms()[v.head],
                if v.negated { "negated " } else { "" },
                program.atoms()[v.body_atom]
            ))
        }),
        None => find_stratification(program).map_err(|c| {
            let names: Vec<&str> = c
                .atoms
                .iter()
                .map(|&a| program.atoms()[a].as_str())
                .collect();
            LogicError::NotStratified(names.join(" -> "))
        }),
    }
}

/// Evaluates strata in ascending order, closing positive rules inside each.
pub fn stratified_model(program: &GroundProgram, strat: &Stratification) -> Interpretation {
    let mut levels: Vec<u32> = strat.levels().to_vec();
    levels.sort_unstable();
    levels.dedup();
    let mut model = Interpretation::EMPTY;
    for s in levels {
        loop {
            let mut grown = model;
            for c in program
                .clauses()
                .iter()
                .filter(|c| strat.level(c.head) == s)
            {
                if c.body.iter().all(|l| model.contains(l.atom) != l.negated) {
                    grown.insert(c.head);
                }
            }
            if grown == model {
                break;
            }
            model = grown;
        }
    }
    model
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectModel {
    pub model: Interpretation,
    /// `∅, T_P(∅), T_P²(∅), ...` up to the first repeated interpretation.
    pub trajectory: Vec<Interpretation>,
    pub stratification: Stratification,
}

impl PerfectModel {
    /// Applications of `T_P` until the model first appears.
    pub fn steps(&self) -> usize {
        self.trajectory
            .iter()
            .position(|&i| i == self.model)
            .unwrap_or(self.trajectory.len())
    }
}

/// Iterates `T_P` from the empty interpretation and cross-checks the fixed
/// point against [`stratified_model`].
pub fn compute_perfect_model(program: &GroundProgram) -> Result<PerfectModel, LogicError> {
    let strat = stratification(program)?;
    let mut trajectory = vec![Interpretation::EMPTY];
    let mut seen = HashMap::from([(Interpretation::EMPTY, 0usize)]);
    loop {
        let last = *trajectory.last().expect("nonempty");
        let next = immediate_consequence(program, last);
        trajectory.push(next);
        if next == last {
            break;
        }
        if let Some(&s) = seen.get(&next) {
            let t = trajectory.len() - 1;
            return Err(LogicError::Cycle {
                start: s,
                period: t - s,
            });
        }
        seen.insert(next, trajectory.len() - 1);
    }
    let model = *trajectory.last().expect("nonempty");
    let oracle = stratified_model(program, &strat);
    if oracle != model {
        return Err(LogicError::OracleMismatch {
            iterated: program.format(model),
            stratified: program.format(oracle),
        });
    }
    Ok(PerfectModel {
        model,
        trajectory,
        stratification: strat,
    })
}

#[derive(Clone, Debug)]
pub struct TpClassification {
    pub class: ContractionClass,
    pub witness: Option<ContractionWitness<Interpretation>>,
    pub fixed_points: Vec<Interpretation>,
}

/// The space of all interpretations under [`interpretation_distance`].
pub fn interpretation_space(
    program: &GroundProgram,
    strat: &Stratification,
) -> Result<FiniteUltrametricSpace<Interpretation>, LogicError> {
    let n = program.atom_count();
    if n > MAX_EXHAUSTIVE_ATOMS {
        return Err(LogicError::TooLarge {
            atoms: n,
            limit: MAX_EXHAUSTIVE_ATOMS,
        });
    }
    let points: Vec<Interpretation> = Interpretation::full(n).subsets().collect();
    Ok(
        FiniteUltrametricSpace::from_fn(points, Dyadic::Zero, |a, b| {
            interpretation_distance(strat, *a, *b)
        })
        .expect("interpretations are distinct"),
    )
}

/// Classifies `T_P` over every interpretation of the base.
pub fn classify_tp_contraction(program: &GroundProgram) -> Result<TpClassification, LogicError> {
    let strat = stratification(program)?;
    let space = interpretation_space(program, &strat)?;
    let pts = space.elements();
    let map: Vec<usize> = pts
        .iter()
        .map(|&i| {
            space
                .index_of(&immediate_consequence(program, i))
                .expect("closed under T_P")
        })
        .collect();
    let (class, witness) = classify_indexed(&space, &map);
    let witness = witness.map(|w| match w {
        ContractionWitness::Expands { m, n } => ContractionWitness::Expands {
            m: pts[m],
            n: pts[n],
        },
        ContractionWitness::OrbitNotStrict { m } => {
            ContractionWitness::OrbitNotStrict { m: pts[m] }
        }
        ContractionWitness::NotStrict { m, n } => ContractionWitness::NotStrict {
            m: pts[m],
            n: pts[n],
        },
    });
    let fixed_points = (0..pts.len())
        .filter(|&k| map[k] == k)
        .map(|k| pts[k])
        .collect();
    Ok(TpClassification {
        class,
        witness,
        fixed_points,
    })
}

/// `T_P` with one processor per atom, each holding that atom's truth value.
pub fn tp_operator(program: &GroundProgram) -> DecomposedOperator<bool> {
    let n = program.atom_count();
    let shared = Arc::new(program.clone());
    let components = (0..n)
        .map(|a| {
            let p = Arc::clone(&shared);
            Arc::new(move |x: &[bool]| {
                immediate_consequence(&p, Interpretation::from_bools(x)).contains(a)
            }) as Arc<dyn Fn(&[bool]) -> bool + Send + Sync>
        })
        .collect();
    DecomposedOperator::from_components(vec![vec![false, true]; n], components)
}
