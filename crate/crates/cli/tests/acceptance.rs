//! Acceptance battery: one PASS/FAIL line per criterion, exact rational
//! equality throughout. Expected values come from the oracles below, not
//! from the library code paths under test.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rtcalc::families::{commuting_blocks, compatible_family, random_blocks, random_matrix, rng, small_rational, table_family};
use rtcalc_core::hopf::{bck_coproduct, coassociativity_defect, deshuffle, hopf_pairing_defects, star_product, tensor_mul, ForestPair, Pairing};
use rtcalc_core::lincomb::{int, tensor_view};
use rtcalc_core::matrix::Matrix;
use rtcalc_core::phimaps::{blocks_commute, build_JD, check_compat, from_blocks, transpose, BlockMatrix, CompatVerdict, JdForm};
use rtcalc_core::postlie::{gen_elem, planted_elem, postlie_axiom_defects, psi_compat_defects, ExtElem, Extension};
use rtcalc_core::prelie::{multiple_prelie_defect, nap_coproduct, nap_eigen_check, planted_graft, theta, theta_morphism_defect, Product};
use rtcalc_core::spde::{noise_extend, partial_lambda, partial_lambda_power, phi_lambda, phi_lambda_via_exp, spde_psi, xi_admissible, xi_generation_probe, SpdeConfig};
use rtcalc_core::trees::enumerate;
use rtcalc_core::{Forest, Label, LinComb, MultiIndex, PhiMap, Planted, Scalar, Tree};

type Check = Result<String, String>;

fn ok<T>(r: rtcalc_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn same<T: PartialEq + Display>(got: &T, want: &T, what: impl Display) -> Result<(), String> {
    ensure(got == want, || format!("{what}: got {got}, expected {want}"))
}

fn same_pairs(got: &LinComb<(Label, Label)>, want: &LinComb<(Label, Label)>, what: impl Display) -> Result<(), String> {
    same(&tensor_view(got), &tensor_view(want), what)
}

fn mi(v: &[u32]) -> Label {
    Label::mi(v)
}

fn entries(l: &Label) -> Vec<u32> {
    l.as_mi().expect("multi-index label").entries().to_vec()
}

fn node(root: Label, kids: Vec<(Label, Tree)>) -> Tree {
    Tree::new(root, kids)
}

fn leaf(root: Label) -> Tree {
    Tree::vertex(root)
}

fn basis<T: Ord + Clone>(x: &T) -> LinComb<T> {
    LinComb::basis(x.clone())
}

fn binom(n: u32, k: u32) -> Scalar {
    if k > n {
        return int(0);
    }
    (0..k).fold(int(1), |acc, i| acc * int(i64::from(n - i)) / int(i64::from(i + 1)))
}

fn power(x: &Scalar, k: u32) -> Scalar {
    (0..k).fold(int(1), |acc, _| acc * x)
}

/// `Σ_{l ≤ min(a,b), |l| = n} λ^l binom(b,l) (a−l)⊗(b−l)`, all `n` when `n` is `None`.
fn binomial_sum(lambda: &[Scalar], a: &[u32], b: &[u32], n: Option<u32>) -> LinComb<(Label, Label)> {
    let box_: Vec<u32> = a.iter().zip(b).map(|(x, y)| *x.min(y)).collect();
    let mut out = LinComb::zero();
    let mut l = vec![0u32; a.len()];
    loop {
        if n.is_none_or(|n| l.iter().sum::<u32>() == n) {
            let mut c = int(1);
            for j in 0..a.len() {
                c = c * power(&lambda[j], l[j]) * binom(b[j], l[j]);
            }
            let sub = |x: &[u32]| mi(&x.iter().zip(&l).map(|(x, y)| x - y).collect::<Vec<_>>());
            out.add_term(c, (sub(a), sub(b)));
        }
        let mut j = 0;
        while j < l.len() && l[j] == box_[j] {
            l[j] = 0;
            j += 1;
        }
        if j == l.len() {
            return out;
        }
        l[j] += 1;
    }
}

fn random_lambda(r: &mut impl rand::Rng, d: usize) -> Vec<Scalar> {
    (0..=d).map(|_| small_rational(r)).collect()
}

fn grid(d: usize, bound: u32) -> Vec<Label> {
    rtcalc_core::Basis::multi_indices(d).sample(bound)
}

fn criterion_1() -> Check {
    let maps = table_family(1, 60);
    let mut incompatible = 0;
    for (i, phi) in maps.iter().enumerate() {
        let (es, vs) = (phi.edge_basis().sample(0), phi.vertex_basis().sample(0));
        let compatible = matches!(ok(check_compat(phi, None))?, CompatVerdict::Compatible);
        incompatible += usize::from(!compatible);
        let singles: Vec<_> = vs.iter().map(|b| basis(&leaf(b.clone()))).collect();
        let mut vanishes = true;
        for a in &es {
            for a2 in &es {
                for x in &singles {
                    for y in &singles {
                        for z in &singles {
                            vanishes &= ok(multiple_prelie_defect(Product::Deformed(phi), a, a2, x, y, z))?.is_zero();
                        }
                    }
                }
            }
        }
        ensure(vanishes == compatible, || format!("map #{i}: verdict {compatible}, defect vanishes {vanishes}"))?;
    }
    ensure(incompatible >= 10, || format!("only {incompatible} incompatible maps"))?;
    Ok(format!("{} maps, {incompatible} incompatible, verdicts match the pre-Lie defect", maps.len()))
}

fn criterion_2() -> Check {
    let mut r = rng(2);
    let mut checked = 0;
    for d in 0..=2 {
        let labels = grid(d, 3);
        for _ in 0..5 {
            let (l, m) = (random_lambda(&mut r, d), random_lambda(&mut r, d));
            let sum: Vec<Scalar> = l.iter().zip(&m).map(|(x, y)| x + y).collect();
            let neg: Vec<Scalar> = l.iter().map(|x| -x.clone()).collect();
            let (pl, pm) = (phi_lambda(&SpdeConfig::new(l.clone())), phi_lambda(&SpdeConfig::new(m)));
            let pneg = phi_lambda(&SpdeConfig::new(neg));
            for a in &labels {
                for b in &labels {
                    let (ea, eb) = (entries(a), entries(b));
                    let composed = ok(pl.apply_lc(&ok(pm.apply(a, b))?))?;
                    same_pairs(&composed, &binomial_sum(&sum, &ea, &eb, None), format_args!("φ^λ∘φ^μ on {a}⊗{b}"))?;
                    let back = ok(pl.apply_lc(&ok(pneg.apply(a, b))?))?;
                    same_pairs(&back, &basis(&(a.clone(), b.clone())), format_args!("φ^λ∘φ^−λ on {a}⊗{b}"))?;
                    checked += 2;
                }
            }
        }
    }
    Ok(format!("{checked} compositions on d ∈ {{0,1,2}}, entries ≤ 3"))
}

fn criterion_3() -> Check {
    let mut r = rng(3);
    let mut checked = 0;
    for d in 0..=2 {
        let labels = grid(d, 3);
        let lambda = random_lambda(&mut r, d);
        let cfg = SpdeConfig::new(lambda.clone());
        let (closed, series, step) = (phi_lambda(&cfg), phi_lambda_via_exp(&cfg, 64), partial_lambda(&cfg));
        for a in &labels {
            for b in &labels {
                let (ea, eb) = (entries(a), entries(b));
                let want = binomial_sum(&lambda, &ea, &eb, None);
                same_pairs(&ok(closed.apply(a, b))?, &want, format_args!("closed form on {a}⊗{b}"))?;
                same_pairs(&ok(series.apply(a, b))?, &want, format_args!("exponential series on {a}⊗{b}"))?;
                let (ma, mb) = (a.as_mi().expect("mi"), b.as_mi().expect("mi"));
                let mut iterated = basis(&(a.clone(), b.clone()));
                for n in 1..=4u32 {
                    iterated = ok(step.apply_lc(&iterated))?;
                    let fact: Scalar = (1..=i64::from(n)).map(int).product();
                    let oracle = binomial_sum(&lambda, &ea, &eb, Some(n)).scale(&fact);
                    let power = ok(partial_lambda_power(&cfg, n, ma, mb))?;
                    same_pairs(&power, &oracle, format_args!("power {n} on {a}⊗{b}"))?;
                    same_pairs(&iterated, &oracle, format_args!("iterated power {n} on {a}⊗{b}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("exp and closed form agree, {checked} powers n ≤ 4 match"))
}

fn morphism_sweep(phi: &PhiMap, trees: &[Tree], edges: &[Label]) -> Result<usize, String> {
    let id = PhiMap::identity(phi.edge_basis().clone(), phi.vertex_basis().clone());
    let mut count = 0;
    for x in trees {
        for y in trees {
            for a in edges {
                let defect = ok(theta_morphism_defect(phi, &id, &basis(x), a, &basis(y)))?;
                ensure(defect.is_zero(), || format!("Θ({x} ⊳_{a} {y}) differs by {defect}"))?;
                count += 1;
            }
        }
    }
    Ok(count)
}

fn criterion_4() -> Check {
    let mut r = rng(4);
    let mut products = 0;
    let lambdas = [vec![int(1)], random_lambda(&mut r, 0)];
    let (es, vs) = (grid(0, 1), grid(0, 1));
    let trees = enumerate::trees(1, 3, &es, &vs);
    for l in &lambdas {
        products += morphism_sweep(&phi_lambda(&SpdeConfig::new(l.clone())), &trees, &es)?;
    }
    for phi in compatible_family(4, 2) {
        let (es, vs) = (phi.edge_basis().sample(0), phi.vertex_basis().sample(0));
        products += morphism_sweep(&phi, &enumerate::trees(1, 3, &es, &vs), &es)?;
    }
    let mut inverted = 0;
    for (d, bound, max) in [(0, 2, 4), (1, 1, 3)] {
        let (es, vs) = (grid(d, bound), grid(d, bound));
        let cfg = SpdeConfig::new(random_lambda(&mut r, d));
        let (fwd, back) = (phi_lambda(&cfg), phi_lambda(&cfg.negated()));
        for t in enumerate::trees(1, max, &es, &vs) {
            let round = ok(theta(&fwd, &ok(theta(&back, &basis(&t)))?))?;
            same(&round, &basis(&t), "Θ_{φ^λ}∘Θ_{φ^−λ}")?;
            inverted += 1;
        }
    }
    Ok(format!("{products} graftings intertwined, {inverted} trees inverted"))
}

fn forest(ps: Vec<Planted>) -> Forest {
    Forest::new(ps)
}

fn planted(edge: &Label, body: Tree) -> Planted {
    Planted::new(edge.clone(), body)
}

/// The cut coproduct of `[a3](b3 [a1](b1) [a2](b2))`, expanded by hand.
fn cut_example(phi: &PhiMap) -> Result<(LinComb<ForestPair>, LinComb<ForestPair>), String> {
    let (a1, a2, a3) = (Label::sym("e1"), Label::sym("e2"), Label::sym("e1"));
    let (b1, b2, b3) = (Label::sym("v1"), Label::sym("v2"), Label::sym("v2"));
    let x = forest(vec![planted(&a3, node(b3.clone(), vec![(a1.clone(), leaf(b1.clone())), (a2.clone(), leaf(b2.clone()))]))]);
    let mut want = LinComb::zero();
    want.add_term(int(1), (x.clone(), Forest::unit()));
    want.add_term(int(1), (Forest::unit(), x.clone()));
    for ((e, v), c) in ok(phi.apply(&a1, &b3))? {
        let lower = node(v, vec![(a2.clone(), leaf(b2.clone()))]);
        want.add_term(c, (forest(vec![planted(&e, leaf(b1.clone()))]), forest(vec![planted(&a3, lower)])));
    }
    for ((e, v), c) in ok(phi.apply(&a2, &b3))? {
        let lower = node(v, vec![(a1.clone(), leaf(b1.clone()))]);
        want.add_term(c, (forest(vec![planted(&e, leaf(b2.clone()))]), forest(vec![planted(&a3, lower)])));
    }
    for ((e2, v), c2) in ok(phi.apply(&a2, &b3))? {
        for ((e1, w), c1) in ok(phi.apply(&a1, &v))? {
            let upper = forest(vec![planted(&e1, leaf(b1.clone())), planted(&e2, leaf(b2.clone()))]);
            want.add_term(c1 * &c2, (upper, forest(vec![planted(&a3, leaf(w))])));
        }
    }
    Ok((ok(bck_coproduct(phi, &basis(&x)))?, want))
}

fn pair_star(phi: &PhiMap, x: &LinComb<ForestPair>, y: &LinComb<ForestPair>) -> Result<LinComb<ForestPair>, String> {
    let mut out = LinComb::zero();
    for ((x1, x2), c) in x {
        for ((y1, y2), d) in y {
            let left = ok(star_product(phi, &basis(x1), &basis(y1)))?;
            let right = ok(star_product(phi, &basis(x2), &basis(y2)))?;
            out.add_scaled(&(c * d), &left.tensor(&right));
        }
    }
    Ok(out)
}

fn criterion_5() -> Check {
    let phi = &compatible_family(5, 1)[0];
    let (es, vs) = (phi.edge_basis().sample(0), phi.vertex_basis().sample(0));
    let fs = enumerate::forests(1, 3, &es, &vs);
    let size = |f: &Forest| f.vertex_count();
    let mut triples = 0;
    let mut pairs = 0;
    for x in &fs {
        for y in fs.iter().filter(|y| size(x) + size(y) <= 4) {
            let (xl, yl) = (basis(x), basis(y));
            let xy = ok(star_product(phi, &xl, &yl))?;
            let lhs = deshuffle(&xy);
            let rhs = pair_star(phi, &deshuffle(&xl), &deshuffle(&yl))?;
            ensure(lhs == rhs, || format!("deshuffle is not multiplicative on ({x}, {y})"))?;
            let cut_xy = ok(bck_coproduct(phi, &basis(&x.mul(y))))?;
            let cut_prod = tensor_mul(&ok(bck_coproduct(phi, &xl))?, &ok(bck_coproduct(phi, &yl))?);
            ensure(cut_xy == cut_prod, || format!("cut coproduct is not multiplicative on ({x}, {y})"))?;
            pairs += 1;
            for z in fs.iter().filter(|z| size(x) + size(y) + size(z) <= 4) {
                let zl = basis(z);
                let l = ok(star_product(phi, &xy, &zl))?;
                let r = ok(star_product(phi, &xl, &ok(star_product(phi, &yl, &zl))?))?;
                ensure(l == r, || format!("({x} ⋆ {y}) ⋆ {z} − {x} ⋆ ({y} ⋆ {z}) = {}", l - r.clone()))?;
                triples += 1;
            }
        }
    }
    let all = enumerate::forests(1, 4, &es, &vs);
    for f in &all {
        let d = ok(coassociativity_defect(|x| bck_coproduct(phi, x), &basis(f)))?;
        ensure(d.is_zero(), || format!("cut coproduct not coassociative on {f}"))?;
    }
    let (got, want) = cut_example(phi)?;
    ensure(got == want, || "hand-expanded cut coproduct differs".into())?;
    let (got, want) = cut_example(&PhiMap::identity(phi.edge_basis().clone(), phi.vertex_basis().clone()))?;
    ensure(got == want, || "hand-expanded cut coproduct differs for the identity".into())?;
    Ok(format!("{triples} associative triples, {pairs} bialgebra pairs, {} coassociative forests, hand-expanded cherry coproduct exact", all.len()))
}

fn criterion_6() -> Check {
    let mut identities = 0;
    for phi in compatible_family(6, 3) {
        let (es, vs) = (phi.edge_basis().sample(0), phi.vertex_basis().sample(0));
        let fs = enumerate::forests(0, 3, &es, &vs);
        let report = ok(hopf_pairing_defects(&phi, &ok(transpose(&phi))?, &Pairing::delta(), &fs, &fs))?;
        ensure(report.is_zero(), || format!("{report:?}"))?;
        identities += report.unit.checked + report.counit.checked + report.star_vs_cut.checked + report.deshuffle_vs_concat.checked;
    }
    Ok(format!("{identities} pairing identities on forests ≤ 3 vertices"))
}

fn shift(l: &Label, i: usize, up: bool) -> Option<Label> {
    let mut e = entries(l);
    if up {
        e[i] += 1;
    } else if e[i] == 0 {
        return None;
    } else {
        e[i] -= 1;
    }
    Some(mi(&e))
}

fn generator_actions() -> Result<usize, String> {
    let cfg = SpdeConfig::ones(1);
    let (base, psi) = spde_psi(&cfg);
    let ext = ok(Extension::new(phi_lambda(&cfg), base, psi))?;
    let (a1, a2, a3) = (mi(&[1, 0]), mi(&[0, 2]), mi(&[1, 1]));
    let bs = [mi(&[0, 1]), mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 0])];
    let body = |b: &[Label; 4]| {
        node(b[0].clone(), vec![(a1.clone(), node(b[1].clone(), vec![(a2.clone(), leaf(b[2].clone()))])), (a3.clone(), leaf(b[3].clone()))])
    };
    let mut count = 0;
    for a in [mi(&[1, 0]), mi(&[0, 3]), mi(&[2, 1])] {
        let x = planted_elem(planted(&a, body(&bs)));
        for i in 0..2 {
            let xi = ok(ext.gen(&format!("X{i}")))?;
            let mut want: ExtElem = LinComb::zero();
            for k in 0..4 {
                let mut b = bs.clone();
                b[k] = shift(&b[k], i, true).expect("shift up");
                want += planted_elem(planted(&a, body(&b)));
            }
            let got = ok(ext.triangle(&xi, &x))?;
            ensure(got == want, || format!("X{i} ⊳ {a}⊗T: got {}, expected {}", ext.render(&got), ext.render(&want)))?;
            let want = shift(&a, i, false).map_or_else(LinComb::zero, |a| planted_elem(planted(&a, body(&bs))));
            ensure(ok(ext.bracket(&x, &xi))? == want, || format!("{{a⊗T, X{i}}} wrong for a = {a}"))?;
            count += 2;
        }
    }
    Ok(count)
}

fn criterion_7() -> Check {
    let mut residuals = 0;
    let mut triples = 0;
    for d in 0..=2 {
        let cfg = SpdeConfig::ones(d);
        let phi = phi_lambda(&cfg);
        let (base, psi) = spde_psi(&cfg);
        let labels = grid(d, 3);
        let report = ok(psi_compat_defects(&phi, &base, &psi, &labels, &labels))?;
        ensure(report.is_zero(), || format!("d = {d}: {report:?}"))?;
        residuals += report.edge_bracket.checked + report.edge_product.checked + report.vertex_bracket.checked + report.intertwining.checked;

        let (es, vs) = if d == 0 {
            (grid(0, 1), grid(0, 1))
        } else {
            let ones = mi(&vec![1; d + 1]);
            let mut vs = vec![mi(&vec![0; d + 1]), mi(MultiIndex::unit(d + 1, d).entries()), ones.clone()];
            vs.dedup();
            (vec![mi(&vec![0; d + 1]), ones], vs)
        };
        let ext = ok(Extension::new(phi, base.clone(), psi))?;
        let mut elems: Vec<(usize, ExtElem)> = (0..base.dim()).map(|i| (0, gen_elem(i, int(1)))).collect();
        elems.extend(enumerate::planted(1, 3, &es, &vs).into_iter().map(|p| (p.vertex_count(), planted_elem(p))));
        for (nx, x) in &elems {
            for (ny, y) in elems.iter().filter(|(n, _)| nx + n <= 3) {
                for (_, z) in elems.iter().filter(|(n, _)| nx + ny + n <= 3) {
                    let defects = ok(postlie_axiom_defects(&ext, x, y, z))?;
                    ensure(defects.is_zero(), || {
                        format!("d = {d}: axioms fail at ({}, {}, {})", ext.render(x), ext.render(y), ext.render(z))
                    })?;
                    triples += 1;
                }
            }
        }
    }
    let actions = generator_actions()?;
    Ok(format!("{residuals} action residuals, {triples} axiom triples, {actions} generator action identities"))
}

fn det_checks(r: &mut impl rand::Rng) -> Result<usize, String> {
    let mut count = 0;
    for n in [2, 3] {
        for _ in 0..10 {
            let (a, b) = (random_matrix(r, n, n, 3), random_matrix(r, n, n, 3));
            let (da, db) = (ok(a.det())?, ok(b.det())?);
            let d = ok(build_JD(&a, &b, JdForm::D))?.assemble();
            let j = ok(build_JD(&a, &b, JdForm::J))?.assemble();
            same(&ok(d.det())?, &(&da * &db), "det D(A,B)")?;
            same(&ok(j.det())?, &(&da * &da), "det J(A,B)")?;
            count += 2;
        }
    }
    Ok(count)
}

fn criterion_8() -> Check {
    let mut r = rng(8);
    let (mut agree, mut compatible) = (0, 0);
    for i in 0..120 {
        let m = if i % 2 == 0 { 2 } else { 3 };
        let (mx, built): (BlockMatrix, bool) = match i % 6 {
            0 | 1 => (random_blocks(&mut r, m, 2, 1, 0.3), false),
            2 | 3 => (commuting_blocks(&mut r, m, 2), false),
            4 => (ok(build_JD(&random_matrix(&mut r, m, m, 2), &random_matrix(&mut r, m, m, 2), JdForm::J))?, true),
            _ => (ok(build_JD(&random_matrix(&mut r, m, m, 2), &random_matrix(&mut r, m, m, 2), JdForm::D))?, true),
        };
        let verdict = matches!(ok(check_compat(&from_blocks(&mx), None))?, CompatVerdict::Compatible);
        let commute = blocks_commute(&mx);
        ensure(verdict == commute, || format!("sample #{i}: compatible {verdict}, blocks commute {commute}"))?;
        ensure(!built || verdict, || format!("sample #{i}: J/D form refuted"))?;
        agree += 1;
        compatible += usize::from(verdict);
    }
    ensure(compatible > 0 && compatible < agree, || "family lacks one of the two classes".into())?;
    let dets = det_checks(&mut r)?;
    Ok(format!("{agree} block matrices ({compatible} compatible), {dets} determinant identities"))
}

fn criterion_9() -> Check {
    let (es, vs) = ([Label::sym("a1"), Label::sym("a2")], [Label::sym("b1"), Label::sym("b2")]);
    let ps = enumerate::planted(1, 4, &es, &vs);
    if let Some(p) = ps.iter().find(|p| !nap_eigen_check(p)) {
        return Err(format!("regrafting fails on {p}"));
    }
    let small = enumerate::planted(1, 3, &es, &vs);
    let images: Vec<_> = small.iter().map(|p| nap_coproduct(&basis(p))).collect();
    let mut rows: BTreeMap<(Planted, Planted), usize> = BTreeMap::new();
    for im in &images {
        for t in im.terms() {
            let next = rows.len();
            rows.entry(t.clone()).or_insert(next);
        }
    }
    let mut m = Matrix::zeros(rows.len(), small.len());
    for (j, im) in images.iter().enumerate() {
        for (t, c) in im {
            m.set(rows[t], j, c.clone());
        }
    }
    let singles: Vec<_> = small.iter().zip(&images).filter(|(p, _)| p.vertex_count() == 1).collect();
    ensure(singles.iter().all(|(_, im)| im.is_zero()), || "a single vertex has nonzero coproduct".into())?;
    let kernel_dim = small.len() - m.rank();
    ensure(kernel_dim == singles.len(), || format!("kernel has dimension {kernel_dim}, expected {}", singles.len()))?;
    Ok(format!("{} planted trees regrafted, kernel on {} trees = {} single vertices", ps.len(), small.len(), singles.len()))
}

fn criterion_10() -> Check {
    let cfg = SpdeConfig::ones(0).with_noise();
    let phi = noise_extend(&cfg);
    let (es, vs) = (phi.edge_basis().sample(1), phi.vertex_basis().sample(1));
    let adm: Vec<_> = enumerate::planted(1, 3, &es, &vs).into_iter().filter(xi_admissible).collect();
    let mut grafts = 0;
    for p in &adm {
        for q in &adm {
            let g = ok(planted_graft(&phi, &basis(p), &basis(q)))?;
            if let Some(bad) = g.terms().find(|t| !xi_admissible(t)) {
                return Err(format!("{p} ⊳ {q} produced {bad}"));
            }
            grafts += 1;
        }
    }
    ok(xi_generation_probe(&cfg, &adm, 3))?;
    Ok(format!("{grafts} grafts stay admissible, all {} admissible trees generated", adm.len()))
}

fn graft_oracle(a: &[u32], x: &Tree, root: &Label, kids: &[(Label, Tree)]) -> LinComb<Tree> {
    let ones = vec![int(1); a.len()];
    let mut out = LinComb::zero();
    let mut graft_at = |target: Option<usize>| {
        let b = target.map_or_else(|| entries(root), |k| entries(kids[k].1.root()));
        for ((e, v), c) in binomial_sum(&ones, a, &b, None) {
            let hung = (e, x.clone());
            let t = match target {
                None => {
                    let mut ks = kids.to_vec();
                    ks.push(hung);
                    node(v, ks)
                }
                Some(k) => {
                    let mut ks = kids.to_vec();
                    ks[k].1 = node(v, vec![hung]);
                    node(root.clone(), ks)
                }
            };
            out.add_term(c, t);
        }
    };
    graft_at(None);
    for (k, (_, kid)) in kids.iter().enumerate() {
        if *kid.root() != Label::Star {
            graft_at(Some(k));
        }
    }
    out
}

const GOLDEN_PLAIN: &str = "\
    2*(<0,1> [<0,1>](<2,1>) [<1,0>](<1,1> [<1,0>](<0,0>)) [<1,1>](<0,1>)) + \
    (<0,2> [<0,1>](<2,1>) [<1,1>](<0,1>) [<1,1>](<1,1> [<1,0>](<0,0>))) + \
    2*(<1,1> [<0,1>](<2,1>) [<1,1>](<0,1>) [<2,0>](<1,1> [<1,0>](<0,0>))) + \
    (<1,2> [<0,1>](<0,0> [<0,0>](<1,1> [<1,0>](<0,0>))) [<1,1>](<0,1>)) + \
    (<1,2> [<0,1>](<0,1> [<0,1>](<1,1> [<1,0>](<0,0>))) [<1,1>](<0,1>)) + \
    2*(<1,2> [<0,1>](<1,0> [<1,0>](<1,1> [<1,0>](<0,0>))) [<1,1>](<0,1>)) + \
    2*(<1,2> [<0,1>](<1,1> [<1,1>](<1,1> [<1,0>](<0,0>))) [<1,1>](<0,1>)) + \
    (<1,2> [<0,1>](<2,0> [<2,0>](<1,1> [<1,0>](<0,0>))) [<1,1>](<0,1>)) + \
    (<1,2> [<0,1>](<2,1>) [<1,1>](<0,0> [<2,0>](<1,1> [<1,0>](<0,0>)))) + \
    (<1,2> [<0,1>](<2,1>) [<1,1>](<0,1>) [<2,1>](<1,1> [<1,0>](<0,0>))) + \
    (<1,2> [<0,1>](<2,1>) [<1,1>](<0,1> [<2,1>](<1,1> [<1,0>](<0,0>)))) + \
    (<1,2> [<0,1>](<2,1> [<2,1>](<1,1> [<1,0>](<0,0>))) [<1,1>](<0,1>))\n";
const GOLDEN_NOISE: &str = "\
    2*(<0,1> [<0,1>](<2,1>) [<1,0>](<1,1> [<1,0>](<0,0>)) [Xi](*)) + \
    (<0,2> [<0,1>](<2,1>) [<1,1>](<1,1> [<1,0>](<0,0>)) [Xi](*)) + \
    2*(<1,1> [<0,1>](<2,1>) [<2,0>](<1,1> [<1,0>](<0,0>)) [Xi](*)) + \
    (<1,2> [<0,1>](<0,0> [<0,0>](<1,1> [<1,0>](<0,0>))) [Xi](*)) + \
    (<1,2> [<0,1>](<0,1> [<0,1>](<1,1> [<1,0>](<0,0>))) [Xi](*)) + \
    2*(<1,2> [<0,1>](<1,0> [<1,0>](<1,1> [<1,0>](<0,0>))) [Xi](*)) + \
    2*(<1,2> [<0,1>](<1,1> [<1,1>](<1,1> [<1,0>](<0,0>))) [Xi](*)) + \
    (<1,2> [<0,1>](<2,0> [<2,0>](<1,1> [<1,0>](<0,0>))) [Xi](*)) + \
    (<1,2> [<0,1>](<2,1>) [<2,1>](<1,1> [<1,0>](<0,0>)) [Xi](*)) + \
    (<1,2> [<0,1>](<2,1> [<2,1>](<1,1> [<1,0>](<0,0>))) [Xi](*))\n";

fn criterion_11() -> Check {
    let bin = env!("CARGO_BIN_EXE_rtcalc");
    let (a, a1, a2, a3) = ([2, 1], mi(&[1, 0]), mi(&[0, 1]), mi(&[1, 1]));
    let (b1, b2, b3, b4, b5) = (mi(&[1, 1]), mi(&[0, 0]), mi(&[1, 2]), mi(&[2, 1]), mi(&[0, 1]));
    let x = node(b1, vec![(a1, leaf(b2))]);
    let mut checked = 0;
    for (noise, golden) in [(false, GOLDEN_PLAIN), (true, GOLDEN_NOISE)] {
        let second = if noise { (Label::Xi, leaf(Label::Star)) } else { (a3.clone(), leaf(b5.clone())) };
        let kids = vec![(a2.clone(), leaf(b4.clone())), second];
        let y = node(b3.clone(), kids.clone());
        let spec = format!(r#"{{"builder": "phi_lambda", "d": 1, "lambda": ["1", "1"], "noise": {noise}}}"#);
        let out = Command::new(bin)
            .args(["graft", "--phi", &spec, "--a", "<2,1>", &x.to_string(), &y.to_string()])
            .output()
            .map_err(|e| e.to_string())?;
        let stdout = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
        ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
        let want = format!("{}\n", graft_oracle(&a, &x, &b3, y.children()));
        ensure(stdout == want, || format!("noise = {noise}: got {stdout:?}, expected {want:?}"))?;
        ensure(stdout == golden, || format!("noise = {noise}: frozen output differs, got {stdout:?}"))?;
        checked += 1;
    }
    Ok(format!("{checked} grafting outputs byte-exact"))
}

type Criterion = (&'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("compatibility verdict matches the multiple pre-Lie defect", criterion_1),
        ("one-parameter group law of φ^λ", criterion_2),
        ("closed form, exponential series and powers of ∂^λ", criterion_3),
        ("Θ intertwines the free and deformed graftings", criterion_4),
        ("Hopf structure and hand-expanded cut coproduct", criterion_5),
        ("Hopf pairing with the transposed map", criterion_6),
        ("post-Lie extension for the sPDE actions", criterion_7),
        ("block criterion and J/D determinants", criterion_8),
        ("NAP coproduct eigenvalues and kernel", criterion_9),
        ("Ξ-admissibility closure and generation", criterion_10),
        ("golden CLI grafting output", criterion_11),
    ];
    let only: Vec<usize> = std::env::var("ACCEPTANCE_ONLY")
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
