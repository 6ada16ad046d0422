//! Staged plans for obtaining med_k from med_n.
//!
//! Direct identification is preferred whenever it applies, since it yields a
//! small, directly checkable term. Otherwise the plan goes through the
//! boosting pipeline: extract med_3, build a b-ary majority function, cascade
//! the k inputs up to width b, and finish with the majority. Stages whose
//! terms would not fit the node budget are marked non-materializable.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::bounds::{boosting_bound, BoundSequence};
use super::{
    almost_divisible, identification_multiplicities, identify_median, majority_any_arity,
    med3_from_medn,
};
use crate::error::{Error, Result};
use crate::term::{make_application, make_variable, Symbol, Term};

use std::collections::HashMap;

#[derive(Clone, Debug)]
pub enum StageKind {
    /// med_k as one identification of variables in med_n.
    DirectIdentification { multiplicities: Vec<u64> },
    /// med_3 out of med_n by the (1, (n-1)/2, (n-1)/2) identification.
    Med3Extraction { source_arity: u64 },
    /// maj_b out of med_3: `boost_steps` arity-+2 boosts (to b or b+1),
    /// then one drop if b is even.
    MajorityChain {
        from: u64,
        to: BigUint,
        boost_steps: BigUint,
        drop_last: bool,
    },
    /// Repeated med_3 cascade through the listed widths.
    Cascade { widths: Vec<BigUint> },
    /// Apply the b-ary majority to the final cascade tuple.
    FinalMajority { arity: BigUint },
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub kind: StageKind,
    pub input_arity: BigUint,
    pub output_arity: BigUint,
    pub materializable: bool,
}

#[derive(Clone, Debug)]
pub struct Plan {
    pub source_arity: u64,
    pub target_arity: u64,
    pub stages: Vec<Stage>,
    pub bound_sequence: Option<BoundSequence>,
}

impl Plan {
    pub fn fully_materializable(&self) -> bool {
        self.stages.iter().all(|s| s.materializable)
    }
}

/// Estimated unique-node count of the fully expanded majority chain,
/// capped at `budget + 1`. Each boost to arity m multiplies the term size by
/// the number of applications in the depth-three scaffold.
fn chain_node_estimate(from: u64, to: &BigUint, budget: u64) -> u64 {
    let cap = budget.saturating_add(1);
    let Some(to) = to.to_u64() else { return cap };
    let mut estimate: u64 = 1;
    let mut arity = from;
    let target = if to % 2 == from % 2 { to } else { to + 1 };
    while arity < target {
        arity += 2;
        let apps = (arity - 2) * (arity - 2) + (arity - 2) + 1;
        estimate = estimate.saturating_mul(apps);
        if estimate > budget {
            return cap;
        }
    }
    estimate
}

pub fn plan_medk_from_medn(n: u64, k: u64, node_budget: u64) -> Result<Plan> {
    if n.is_multiple_of(2) {
        return Err(Error::EvenArity(n as usize));
    }
    if k.is_multiple_of(2) {
        return Err(Error::EvenArity(k as usize));
    }
    if n < 3 || k < 3 {
        return Err(Error::InvalidParameter(format!(
            "arities must be >= 3, got n={n}, k={k}"
        )));
    }
    let big = |x: u64| BigUint::from(x);

    // med_3 is already available as a single identification; the degenerate
    // cascade (C(3,3) = 1) never helps.
    if k == 3 {
        return Ok(Plan {
            source_arity: n,
            target_arity: k,
            stages: vec![Stage {
                kind: StageKind::Med3Extraction { source_arity: n },
                input_arity: big(3),
                output_arity: big(1),
                materializable: n < node_budget,
            }],
            bound_sequence: None,
        });
    }

    if k <= n && almost_divisible(n, k)? {
        return Ok(Plan {
            source_arity: n,
            target_arity: k,
            stages: vec![Stage {
                kind: StageKind::DirectIdentification {
                    multiplicities: identification_multiplicities(n, k),
                },
                input_arity: big(k),
                output_arity: big(1),
                materializable: n < node_budget,
            }],
            bound_sequence: None,
        });
    }

    let bs = boosting_bound(k)?;
    let b = bs.bound.clone();
    let boost_steps = {
        let to_odd = if (&b % 2u32).to_u64() == Some(1) {
            b.clone()
        } else {
            &b + 1u32
        };
        (to_odd - 3u32) / 2u32
    };
    let drop_last = (&b % 2u32).to_u64() == Some(0);
    let chain_estimate = chain_node_estimate(3, &b, node_budget);
    let chain_ok = chain_estimate <= node_budget;
    let cascade_nodes: Option<u64> = {
        let mut total: u64 = 0;
        let mut ok = true;
        for w in &bs.n_seq {
            match w.to_u64().and_then(|w| total.checked_add(w)) {
                Some(t) if t <= node_budget => total = t,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        ok.then_some(total)
    };

    let stages = vec![
        Stage {
            kind: StageKind::Med3Extraction { source_arity: n },
            input_arity: big(k),
            output_arity: big(k),
            materializable: n < node_budget,
        },
        Stage {
            kind: StageKind::MajorityChain {
                from: 3,
                to: b.clone(),
                boost_steps,
                drop_last,
            },
            input_arity: big(k),
            output_arity: big(k),
            materializable: chain_ok,
        },
        Stage {
            kind: StageKind::Cascade {
                widths: bs.n_seq.clone(),
            },
            input_arity: big(k),
            output_arity: b.clone(),
            materializable: cascade_nodes.is_some(),
        },
        Stage {
            kind: StageKind::FinalMajority { arity: b.clone() },
            input_arity: b,
            output_arity: big(1),
            materializable: chain_ok,
        },
    ];

    Ok(Plan {
        source_arity: n,
        target_arity: k,
        stages,
        bound_sequence: Some(bs),
    })
}

/// Flatten a fully materializable plan into a single term over med_n.
/// Returns `None` when some stage is over budget.
pub fn materialize_plan(plan: &Plan, node_budget: u64) -> Result<Option<Term>> {
    if !plan.fully_materializable() {
        return Ok(None);
    }
    let n = plan.source_arity;
    match plan.stages.first().map(|s| &s.kind) {
        Some(StageKind::Med3Extraction { .. }) if plan.stages.len() == 1 => {
            return med3_from_medn(n).map(Some);
        }
        Some(StageKind::DirectIdentification { .. }) => {
            return identify_median(n, plan.target_arity).map(Some);
        }
        _ => {}
    }

    // Full pipeline. Everything below is expressed over med_3 first and the
    // med_3 symbol is expanded into med_n at the end.
    let bs = plan
        .bound_sequence
        .as_ref()
        .expect("pipeline plans carry their bound sequence");
    let b = bs.bound.to_u64().ok_or(Error::NodeBudget {
        needed: u64::MAX,
        budget: node_budget,
    })?;
    let med3_symbol = Symbol::median(3)?;
    let majority = majority_any_arity(&med3_symbol, b, node_budget)?;

    let mut layer: Vec<Term> = (0..plan.target_arity as usize).map(make_variable).collect();
    for _ in 1..bs.n_seq.len() {
        let mut next = Vec::new();
        for a in 0..layer.len() {
            for bb in a + 1..layer.len() {
                for c in bb + 1..layer.len() {
                    next.push(make_application(
                        med3_symbol.clone(),
                        vec![layer[a].clone(), layer[bb].clone(), layer[c].clone()],
                    )?);
                }
            }
        }
        layer = next;
    }
    let map: HashMap<usize, Term> = layer.into_iter().enumerate().collect();
    let combined = majority.substitute(&map)?;
    let med3_body = med3_from_medn(n)?;
    let expanded = combined.expand_symbol(&med3_symbol, &med3_body)?;
    if expanded.node_count() > node_budget {
        return Err(Error::NodeBudget {
            needed: expanded.node_count(),
            budget: node_budget,
        });
    }
    Ok(Some(expanded))
}

// Serialization: big naturals as decimal strings, rationals as "p/q".

fn decimal(n: &BigUint) -> String {
    n.to_str_radix(10)
}

impl Serialize for Stage {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Stage", 4)?;
        match &self.kind {
            StageKind::DirectIdentification { multiplicities } => {
                s.serialize_field("kind", "direct-identification")?;
                s.serialize_field("multiplicities", multiplicities)?;
            }
            StageKind::Med3Extraction { source_arity } => {
                s.serialize_field("kind", "med3-extraction")?;
                s.serialize_field("source_arity", source_arity)?;
            }
            StageKind::MajorityChain {
                from,
                to,
                boost_steps,
                drop_last,
            } => {
                s.serialize_field("kind", "majority-chain")?;
                s.serialize_field(
                    "chain",
                    &serde_json::json!({
                        "from": from,
                        "to": decimal(to),
                        "boost_steps": decimal(boost_steps),
                        "drop_last": drop_last,
                    }),
                )?;
            }
            StageKind::Cascade { widths } => {
                s.serialize_field("kind", "cascade")?;
                let widths: Vec<String> = widths.iter().map(decimal).collect();
                s.serialize_field("widths", &widths)?;
            }
            StageKind::FinalMajority { arity } => {
                s.serialize_field("kind", "final-majority")?;
                s.serialize_field("arity", &decimal(arity))?;
            }
        }
        s.serialize_field("input_arity", &decimal(&self.input_arity))?;
        s.serialize_field("output_arity", &decimal(&self.output_arity))?;
        s.serialize_field("materializable", &self.materializable)?;
        s.end()
    }
}

impl Serialize for BoundSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        fn ratio(r: &num_rational::BigRational) -> String {
            format!("{}/{}", r.numer(), r.denom())
        }
        let mut s = serializer.serialize_struct("BoundSequence", 6)?;
        let n: Vec<String> = self.n_seq.iter().map(decimal).collect();
        let k: Vec<String> = self.k_seq.iter().map(ratio).collect();
        let r: Vec<String> = self.r_seq.iter().map(ratio).collect();
        s.serialize_field("n_seq", &n)?;
        s.serialize_field("k_seq", &k)?;
        s.serialize_field("r_seq", &r)?;
        s.serialize_field("stop_index", &self.stop_index)?;
        s.serialize_field("bound", &decimal(&self.bound))?;
        s.serialize_field("integrality_warnings", &self.integrality_warnings)?;
        s.end()
    }
}

impl Serialize for Plan {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Plan", 4)?;
        s.serialize_field("source_arity", &self.source_arity)?;
        s.serialize_field("target_arity", &self.target_arity)?;
        s.serialize_field("stages", &self.stages)?;
        s.serialize_field("bound_sequence", &self.bound_sequence)?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::identify_median;
    use crate::term::{print_term, DEFAULT_NODE_BUDGET};

    #[test]
    fn direct_identification_when_almost_divisible() {
        let plan = plan_medk_from_medn(9, 5, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(plan.stages.len(), 1);
        let StageKind::DirectIdentification { multiplicities } = &plan.stages[0].kind else {
            panic!("expected direct identification");
        };
        assert_eq!(multiplicities, &vec![2, 2, 2, 2, 1]);
        assert!(plan.fully_materializable());
        let t = materialize_plan(&plan, DEFAULT_NODE_BUDGET)
            .unwrap()
            .unwrap();
        assert_eq!(t, identify_median(9, 5).unwrap());
    }

    #[test]
    fn ternary_target_uses_extraction() {
        let plan = plan_medk_from_medn(9, 3, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(plan.stages.len(), 1);
        assert!(matches!(
            plan.stages[0].kind,
            StageKind::Med3Extraction { source_arity: 9 }
        ));
        let t = materialize_plan(&plan, DEFAULT_NODE_BUDGET)
            .unwrap()
            .unwrap();
        assert_eq!(
            print_term(&t),
            "(med9 (v 0) (v 1) (v 1) (v 1) (v 1) (v 2) (v 2) (v 2) (v 2))"
        );
    }

    #[test]
    fn pipeline_plan_for_upward_synthesis() {
        let plan = plan_medk_from_medn(3, 5, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(plan.stages.len(), 4);
        let bs = plan.bound_sequence.as_ref().unwrap();
        assert_eq!(bs.bound, BigUint::from(120u32));

        let StageKind::MajorityChain {
            from,
            to,
            boost_steps,
            drop_last,
        } = &plan.stages[1].kind
        else {
            panic!("expected a majority chain stage");
        };
        assert_eq!(*from, 3);
        assert_eq!(*to, BigUint::from(120u32));
        // 3 -> 121 odd, then one drop back to 120
        assert_eq!(*boost_steps, BigUint::from(59u32));
        assert!(drop_last);

        let StageKind::Cascade { widths } = &plan.stages[2].kind else {
            panic!("expected a cascade stage");
        };
        let widths: Vec<u32> = widths.iter().map(|w| w.to_u32().unwrap()).collect();
        assert_eq!(widths, vec![5, 10, 120]);

        // the chain through arity 121 dwarfs any practical node budget
        assert!(!plan.stages[1].materializable);
        assert!(plan.stages[2].materializable);
        assert!(!plan.fully_materializable());
        assert!(materialize_plan(&plan, DEFAULT_NODE_BUDGET)
            .unwrap()
            .is_none());
    }

    #[test]
    fn stage_arities_compose() {
        for (n, k) in [(3u64, 5u64), (9, 5), (5, 3), (3, 7), (7, 3), (3, 9)] {
            let plan = plan_medk_from_medn(n, k, DEFAULT_NODE_BUDGET).unwrap();
            let first = plan.stages.first().unwrap();
            assert_eq!(first.input_arity, BigUint::from(k), "({n},{k})");
            for pair in plan.stages.windows(2) {
                assert_eq!(pair[0].output_arity, pair[1].input_arity, "({n},{k})");
            }
            assert_eq!(
                plan.stages.last().unwrap().output_arity,
                BigUint::from(1u32),
                "({n},{k})"
            );
        }
    }

    #[test]
    fn plans_serialize_with_decimal_strings() {
        let plan = plan_medk_from_medn(3, 5, DEFAULT_NODE_BUDGET).unwrap();
        let json = serde_json::to_value(&plan).unwrap();
        assert_eq!(json["stages"][1]["kind"], "majority-chain");
        assert_eq!(json["stages"][1]["chain"]["to"], "120");
        assert_eq!(json["bound_sequence"]["r_seq"][2], "19/30");
        let plan = plan_medk_from_medn(9, 5, DEFAULT_NODE_BUDGET).unwrap();
        let json = serde_json::to_value(&plan).unwrap();
        assert_eq!(json["stages"][0]["kind"], "direct-identification");
        assert!(json["bound_sequence"].is_null());
    }

    #[test]
    fn rejects_even_arities() {
        assert!(plan_medk_from_medn(4, 3, DEFAULT_NODE_BUDGET).is_err());
        assert!(plan_medk_from_medn(5, 4, DEFAULT_NODE_BUDGET).is_err());
        assert!(plan_medk_from_medn(3, 1, DEFAULT_NODE_BUDGET).is_err());
    }
}
