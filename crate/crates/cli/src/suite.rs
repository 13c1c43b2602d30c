//! A battery of exact property checks over small, seeded inputs.

use clap::ValueEnum;

use rtcalc_core::hopf::{bck_coproduct, coassociativity_defect, hopf_pairing_defects, star_product, Pairing};
use rtcalc_core::phimaps::{
    blocks_commute, check_compat, compose, exp_series, from_blocks, transpose, CompatVerdict, DEFAULT_MAX_ITER,
};
use rtcalc_core::postlie::{planted_elem, postlie_axiom_defects, psi_compat_defects, ExtElem, ExtTerm, Extension};
use rtcalc_core::lincomb::{int, tensor_view};
use rtcalc_core::prelie::{multiple_prelie_defect, planted_graft, nap_eigen_check, theta_morphism_defect, Product};
use rtcalc_core::spde::{noise_extend, partial_lambda, phi_lambda, phi_lambda_via_exp, spde_psi, xi_admissible, xi_generation_probe, SpdeConfig};
use rtcalc_core::trees::enumerate;
use rtcalc_core::{Label, LinComb, PhiMap, Scalar, Tree};

use crate::families::{random_blocks, rng, small_rational, table_family};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Small,
    Full,
}

impl Level {
    fn scale(self, small: usize, full: usize) -> usize {
        match self {
            Level::Small => small,
            Level::Full => full,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(Level) -> Result<String, String>;

const CHECKS: &[(&str, Check)] = &[
    ("compatibility-vs-prelie", compat_vs_prelie),
    ("phi-lambda-semigroup", semigroup),
    ("phi-lambda-exp", lambda_exp),
    ("theta-morphism", theta_morphism),
    ("star-associative", star_associative),
    ("cut-coassociative", cut_coassociative),
    ("hopf-pairing", hopf_pairing),
    ("spde-post-lie", spde_postlie),
    ("blocks-vs-compat", blocks_vs_compat),
    ("nap-eigen", nap_eigen),
    ("xi-closure", xi_closure),
];

pub fn run(level: Level) -> Vec<CheckResult> {
    run_each(level).collect()
}

/// Runs the checks lazily, in order.
pub fn run_each(level: Level) -> impl Iterator<Item = CheckResult> {
    CHECKS
        .iter()
        .map(move |(name, check)| {
            let (passed, detail) = match check(level) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult { name, passed, detail }
        })
}

fn err(e: rtcalc_core::Error) -> String {
    e.to_string()
}

fn finite_labels(phi: &PhiMap) -> (Vec<Label>, Vec<Label>) {
    (phi.edge_basis().sample(0), phi.vertex_basis().sample(0))
}

fn compat_vs_prelie(level: Level) -> Result<String, String> {
    let maps = table_family(11, level.scale(15, 60));
    let mut refuted = 0;
    for (i, phi) in maps.iter().enumerate() {
        let (es, vs) = finite_labels(phi);
        let compatible = matches!(check_compat(phi, None).map_err(err)?, CompatVerdict::Compatible);
        refuted += usize::from(!compatible);
        let singles: Vec<LinComb<Tree>> = vs.iter().map(|b| LinComb::basis(Tree::vertex(b.clone()))).collect();
        let mut vanishes = true;
        'outer: for a in &es {
            for a2 in &es {
                for x in &singles {
                    for y in &singles {
                        for z in &singles {
                            if !multiple_prelie_defect(Product::Deformed(phi), a, a2, x, y, z).map_err(err)?.is_zero() {
                                vanishes = false;
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
        if vanishes != compatible {
            return Err(format!("map #{i}: compatible={compatible}, pre-Lie defect vanishes={vanishes}"));
        }
    }
    Ok(format!("{} maps, {refuted} incompatible", maps.len()))
}

fn agree_on(phi: &PhiMap, psi: &PhiMap, bound: u32) -> Result<usize, String> {
    let (es, vs) = (phi.edge_basis().sample(bound), phi.vertex_basis().sample(bound));
    for a in &es {
        for b in &vs {
            let (x, y) = (phi.apply(a, b).map_err(err)?, psi.apply(a, b).map_err(err)?);
            if x != y {
                return Err(format!("differ on {a} ⊗ {b}: {} vs {}", tensor_view(&x), tensor_view(&y)));
            }
        }
    }
    Ok(es.len() * vs.len())
}

fn random_lambda(r: &mut impl rand::Rng, d: usize) -> Vec<Scalar> {
    (0..=d).map(|_| small_rational(r)).collect()
}

fn semigroup(level: Level) -> Result<String, String> {
    let mut r = rng(23);
    let mut pairs = 0;
    for d in 0..=level.scale(1, 2) {
        for _ in 0..level.scale(2, 5) {
            let (l, m) = (random_lambda(&mut r, d), random_lambda(&mut r, d));
            let sum: Vec<Scalar> = l.iter().zip(&m).map(|(x, y)| x + y).collect();
            let (cl, cm) = (SpdeConfig::new(l), SpdeConfig::new(m));
            let composed = compose(&phi_lambda(&cl), &phi_lambda(&cm)).map_err(err)?;
            pairs += agree_on(&composed, &phi_lambda(&SpdeConfig::new(sum)), 2)?;
            let id = compose(&phi_lambda(&cl), &phi_lambda(&cl.negated())).map_err(err)?;
            let plain = phi_lambda(&SpdeConfig::new(vec![int(0); d + 1]));
            pairs += agree_on(&id, &plain, 2)?;
        }
    }
    Ok(format!("{pairs} pairs"))
}

fn lambda_exp(level: Level) -> Result<String, String> {
    let mut r = rng(29);
    let mut pairs = 0;
    for d in 0..=level.scale(1, 2) {
        let cfg = SpdeConfig::new(random_lambda(&mut r, d));
        pairs += agree_on(&phi_lambda(&cfg), &phi_lambda_via_exp(&cfg, DEFAULT_MAX_ITER), 2)?;
        pairs += agree_on(&phi_lambda(&cfg), &exp_series(&partial_lambda(&cfg), DEFAULT_MAX_ITER), 2)?;
    }
    Ok(format!("{pairs} pairs"))
}

fn theta_morphism(level: Level) -> Result<String, String> {
    let mut maps = vec![phi_lambda(&SpdeConfig::ones(0))];
    maps.extend(crate::families::compatible_family(31, 2));
    let mut count = 0;
    for phi in &maps {
        let bound = if phi.is_finite() { 0 } else { 1 };
        let (es, vs) = (phi.edge_basis().sample(bound), phi.vertex_basis().sample(bound));
        // Dense tables make products large; their trees use a single edge label.
        let tree_edges = if phi.is_finite() { &es[..1] } else { &es[..] };
        let id = PhiMap::identity(phi.edge_basis().clone(), phi.vertex_basis().clone());
        let trees = enumerate::trees(1, level.scale(2, 3), tree_edges, &vs);
        for x in &trees {
            for y in &trees {
                for a in &es {
                    let (x, y) = (LinComb::basis(x.clone()), LinComb::basis(y.clone()));
                    let d = theta_morphism_defect(phi, &id, &x, a, &y).map_err(err)?;
                    if !d.is_zero() {
                        return Err(format!("x = {x}, a = {a}, y = {y}: {d}"));
                    }
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} products"))
}

fn star_associative(level: Level) -> Result<String, String> {
    let phi = &crate::families::compatible_family(37, 1)[0];
    let (es, vs) = finite_labels(phi);
    let total = level.scale(3, 4);
    let fs = enumerate::forests(1, total - 2, &es, &vs);
    let mut count = 0;
    for x in &fs {
        for y in fs.iter().filter(|y| x.vertex_count() + y.vertex_count() < total) {
            let (xl, yl) = (LinComb::basis(x.clone()), LinComb::basis(y.clone()));
            let xy = star_product(phi, &xl, &yl).map_err(err)?;
            for z in fs.iter().filter(|z| x.vertex_count() + y.vertex_count() + z.vertex_count() <= total) {
                let zl = LinComb::basis(z.clone());
                let l = star_product(phi, &xy, &zl).map_err(err)?;
                let r = star_product(phi, &xl, &star_product(phi, &yl, &zl).map_err(err)?).map_err(err)?;
                if l != r {
                    return Err(format!("({x}, {y}, {z}): {}", l - r));
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} triples"))
}

fn cut_coassociative(level: Level) -> Result<String, String> {
    let phi = &crate::families::compatible_family(41, 1)[0];
    let (es, vs) = finite_labels(phi);
    let fs = enumerate::forests(1, level.scale(2, 3), &es, &vs);
    for f in &fs {
        let d = coassociativity_defect(|x| bck_coproduct(phi, x), &LinComb::basis(f.clone())).map_err(err)?;
        if !d.is_zero() {
            return Err(format!("{f}: nonzero defect"));
        }
    }
    Ok(format!("{} forests", fs.len()))
}

fn hopf_pairing(level: Level) -> Result<String, String> {
    let maps = crate::families::compatible_family(43, level.scale(1, 3));
    let mut count = 0;
    for phi in &maps {
        let (es, vs) = finite_labels(phi);
        let fs = enumerate::forests(0, level.scale(2, 3), &es, &vs);
        let report = hopf_pairing_defects(phi, &transpose(phi).map_err(err)?, &Pairing::delta(), &fs, &fs).map_err(err)?;
        if !report.is_zero() {
            return Err(format!("{report:?}"));
        }
        count += report.unit.checked + report.counit.checked + report.star_vs_cut.checked + report.deshuffle_vs_concat.checked;
    }
    Ok(format!("{count} identities"))
}

fn spde_postlie(level: Level) -> Result<String, String> {
    let mut count = 0;
    for d in 0..=level.scale(0, 1) {
        let cfg = SpdeConfig::ones(d);
        let phi = phi_lambda(&cfg);
        let (base, psi) = spde_psi(&cfg);
        let (es, vs) = (phi.edge_basis().sample(2), phi.vertex_basis().sample(2));
        let report = psi_compat_defects(&phi, &base, &psi, &es, &vs).map_err(err)?;
        if !report.is_zero() {
            return Err(format!("d = {d}: {report:?}"));
        }
        count += report.edge_bracket.checked + report.edge_product.checked + report.vertex_bracket.checked + report.intertwining.checked;

        let (es, vs) = (phi.edge_basis().sample(1), phi.vertex_basis().sample(1));
        let ext = Extension::new(phi, base.clone(), psi).map_err(err)?;
        let mut elems: Vec<ExtElem> = (0..base.dim()).map(|i| LinComb::basis(ExtTerm::Gen(i))).collect();
        let max = if d == 0 { level.scale(1, 2) } else { 1 };
        elems.extend(enumerate::planted(1, max, &es, &vs).into_iter().map(planted_elem));
        for x in &elems {
            for y in &elems {
                for z in &elems {
                    if !postlie_axiom_defects(&ext, x, y, z).map_err(err)?.is_zero() {
                        return Err(format!("axioms fail at ({}, {}, {})", ext.render(x), ext.render(y), ext.render(z)));
                    }
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} checks"))
}

fn blocks_vs_compat(level: Level) -> Result<String, String> {
    let mut r = rng(47);
    let n = level.scale(20, 100);
    for i in 0..n {
        let mx = if i % 2 == 0 {
            random_blocks(&mut r, 2, 2, 1, 0.4)
        } else {
            crate::families::commuting_blocks(&mut r, 2, 2)
        };
        let compat = matches!(check_compat(&from_blocks(&mx), None).map_err(err)?, CompatVerdict::Compatible);
        if compat != blocks_commute(&mx) {
            return Err(format!("sample #{i} disagrees"));
        }
    }
    Ok(format!("{n} block matrices"))
}

fn nap_eigen(level: Level) -> Result<String, String> {
    let (es, vs) = ([Label::sym("a1"), Label::sym("a2")], [Label::sym("b1"), Label::sym("b2")]);
    let ps = enumerate::planted(1, level.scale(3, 4), &es, &vs);
    match ps.iter().find(|p| !nap_eigen_check(p)) {
        Some(p) => Err(format!("fails on {p}")),
        None => Ok(format!("{} planted trees", ps.len())),
    }
}

fn xi_closure(level: Level) -> Result<String, String> {
    let cfg = SpdeConfig::ones(0).with_noise();
    let phi = noise_extend(&cfg);
    let (es, vs) = (phi.edge_basis().sample(1), phi.vertex_basis().sample(1));
    let max = level.scale(2, 3);
    let adm: Vec<_> = enumerate::planted(1, max, &es, &vs).into_iter().filter(xi_admissible).collect();
    for p in &adm {
        for q in &adm {
            if p.vertex_count() + q.vertex_count() > max {
                continue;
            }
            let g = planted_graft(&phi, &LinComb::basis(p.clone()), &LinComb::basis(q.clone()))
                .map_err(err)?;
            if let Some(bad) = g.terms().find(|t| !xi_admissible(t)) {
                return Err(format!("{p} |> {q} produced {bad}"));
            };
        }
    }
    xi_generation_probe(&cfg, &adm, max).map_err(err)?;
    Ok(format!("{} admissible trees", adm.len()))
}
