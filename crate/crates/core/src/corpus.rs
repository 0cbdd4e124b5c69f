//! Seeded random formulas, rule instances, perturbed proof pairs and
//! interaction sessions for property tests and acceptance runs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exercise::{Exercise, ExerciseKind};
use crate::formula::{Formula, Position};
use crate::policy::FeedbackPolicy;
use crate::rules::pattern::Bindings;
use crate::rules::{standard_rules, Rule, RuleApplication, RuleDirection, Variant};
use crate::session::{Session, Submitted};
use crate::state::ChainDirection;

pub type CorpusRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CorpusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const ATOMS: [&str; 6] = ["p", "q", "r", "s", "t", "u"];

/// Shape parameters of generated formulas.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub atoms: usize,
    pub depth: usize,
    pub leaf: f64,
    /// Most `<->` nodes per formula; `None` for no limit.
    pub max_iff: Option<usize>,
    /// Leaves may be `T` or `F`.
    pub constants: bool,
}

impl Shape {
    /// The normal-form solver corpus: at most five atoms, depth five, at
    /// most one equivalence.
    pub const NORMAL_FORM: Shape = Shape {
        atoms: 5,
        depth: 5,
        leaf: 0.3,
        max_iff: Some(1),
        constants: false,
    };

    /// Small formulas, constants included, for rule instantiations.
    pub const SMALL: Shape = Shape {
        atoms: 6,
        depth: 3,
        leaf: 0.4,
        max_iff: None,
        constants: true,
    };
}

fn count_iff(f: &Formula) -> usize {
    usize::from(matches!(f, Formula::Iff(..))) + f.children().into_iter().map(count_iff).sum::<usize>()
}

fn raw(rng: &mut CorpusRng, s: &Shape, depth: usize) -> Formula {
    if depth <= 1 || rng.gen_bool(s.leaf) {
        if s.constants {
            match rng.gen_range(0..12) {
                0 => return Formula::True,
                1 => return Formula::False,
                _ => {}
            }
        }
        return Formula::atom(ATOMS[rng.gen_range(0..s.atoms)]);
    }
    let sub = |rng: &mut CorpusRng| raw(rng, s, depth - 1);
    match rng.gen_range(0..8) {
        0 | 6 => Formula::not(sub(rng)),
        1 | 7 => Formula::and([sub(rng), sub(rng)]),
        2 | 5 => Formula::or([sub(rng), sub(rng)]),
        3 => Formula::imp(sub(rng), sub(rng)),
        _ => Formula::iff(sub(rng), sub(rng)),
    }
}

pub fn formula(rng: &mut CorpusRng, s: &Shape) -> Formula {
    loop {
        let f = raw(rng, s, s.depth);
        if s.max_iff.is_none_or(|m| count_iff(&f) <= m) {
            return f;
        }
    }
}

pub fn formulas(seed: u64, n: usize, s: &Shape) -> Vec<Formula> {
    let mut r = rng(seed);
    (0..n).map(|_| formula(&mut r, s)).collect()
}

/// Random bindings for every metavariable of a variant.
pub fn instantiation(rng: &mut CorpusRng, v: &Variant, s: &Shape) -> Bindings {
    let (mut vars, mut lists) = v.lhs.metas();
    let (rv, rl) = v.rhs.metas();
    vars.extend(rv);
    lists.extend(rl);
    let mut b = Bindings::new();
    for m in vars {
        if b.var(m).is_none() {
            b = b.with_var(m, formula(rng, s));
        }
    }
    for m in lists {
        if b.list(m).is_none() {
            let n = rng.gen_range(2..=4);
            b = b.with_list(m, (0..n).map(|_| formula(rng, s)).collect());
        }
    }
    b
}

// (position, rule, variant, direction, result) of every rewrite of `f`.
type Rewrite = (Position, &'static Rule, usize, RuleDirection, Formula);

fn rewrites(f: &Formula, fill: &Formula) -> Vec<Rewrite> {
    let mut out = Vec::new();
    for pos in f.positions() {
        for rule in standard_rules() {
            for (vi, v) in rule.variants.iter().enumerate() {
                for dir in RuleDirection::BOTH {
                    let extra = v
                        .free_metas(dir)
                        .into_iter()
                        .fold(Bindings::new(), |b, m| b.with_var(m, fill.clone()));
                    let Ok(results) = v.rewrite_all(dir, f, &pos, &extra) else {
                        continue;
                    };
                    for after in results {
                        if after != *f {
                            out.push((pos.clone(), rule, vi, dir, after));
                        }
                    }
                }
            }
        }
    }
    out
}

fn application(f: &Formula, (position, rule, variant, direction, after): Rewrite) -> RuleApplication {
    RuleApplication {
        rule_id: rule.id.to_string(),
        variant,
        direction,
        position,
        before: f.clone(),
        after,
    }
}

/// Every application of a standard rule to `f`; metavariables the match
/// leaves free are bound to `fill`.
pub fn applications(f: &Formula, fill: &Formula) -> Vec<RuleApplication> {
    rewrites(f, fill).into_iter().map(|r| application(f, r)).collect()
}

/// A random rule application on `f`, free metavariables bound to an atom
/// of `f`.
pub fn random_application(rng: &mut CorpusRng, f: &Formula) -> Option<RuleApplication> {
    let atoms: Vec<String> = f.atoms().into_iter().collect();
    let fill = Formula::atom(atoms.choose(rng).map_or("p", String::as_str));
    let mut all = rewrites(f, &fill);
    if all.is_empty() {
        return None;
    }
    let k = rng.gen_range(0..all.len());
    Some(application(f, all.swap_remove(k)))
}

/// `f` rewritten by up to `steps` random sound rule applications, keeping
/// the size below `max_size`.
pub fn perturb(rng: &mut CorpusRng, f: &Formula, steps: usize, max_size: usize) -> Formula {
    let mut g = f.clone();
    for _ in 0..steps {
        let Some(a) = random_application(rng, &g) else { break };
        if a.after.size() <= max_size {
            g = a.after;
        }
    }
    g
}

fn random_text(rng: &mut CorpusRng, head: &Formula) -> String {
    match rng.gen_range(0..6) {
        0..=2 => random_application(rng, head).map_or_else(|| head.to_string(), |a| a.after.to_string()),
        3 => perturb(rng, head, 2, 40).to_string(),
        4 => formula(rng, &Shape::NORMAL_FORM).to_string(),
        _ => format!("{head} /\\ ("),
    }
}

/// A session of `actions` random interactions on one exercise of `pool`:
/// steps (single rule applications, larger rewrites, unrelated formulas,
/// syntax errors), undos, hints, and next-step requests, under a random
/// policy. Rejected actions leave the session unchanged.
pub fn random_session(seed: u64, pool: &[Exercise], actions: usize) -> Session {
    let mut rng = rng(seed);
    let policy = if rng.gen_bool(0.5) {
        FeedbackPolicy::enhanced()
    } else {
        FeedbackPolicy::pilot()
    };
    let mut ts = rng.gen_range(0..1_000u64);
    let mut s = Session::new(format!("s{seed}"), None, ts);
    let ex = pool.choose(&mut rng).expect("non-empty pool").clone();
    s.start(&ex, ts).expect("fresh session");
    for _ in 0..actions {
        ts += rng.gen_range(0..90_000);
        let dir = if ex.kind == ExerciseKind::Proof && rng.gen_bool(0.5) {
            ChainDirection::Backward
        } else {
            ChainDirection::Forward
        };
        let _ = match rng.gen_range(0..10) {
            0..=5 => {
                let head = s.progress(&ex.id).expect("started").state.head(dir).expect("valid direction").clone();
                let text = random_text(&mut rng, &head);
                let claim = rng.gen_bool(0.3).then(|| "demorgan".to_string());
                let sub = Submitted {
                    formula_text: text,
                    rule_id: claim,
                    direction: dir,
                };
                s.submit(&ex.id, ts, sub, &policy).map(drop)
            }
            6 | 7 => s.undo(&ex.id, ts, dir).map(drop),
            8 => s.request_hint(&ex.id, ts, rng.gen_range(1..=4)).map(drop),
            _ => s.request_next(&ex.id, ts).map(drop),
        };
    }
    s
}
