//! Witness-indistinguishable proofs for pairing-product equations.
//!
//! An equation over committed variables `X ∈ G1^k`, `Y ∈ G2^l` reads
//!
//! ```text
//! ∏ e(A_j, Y_j) · ∏ e(X_i, B_i) · ∏∏ e(X_i, Y_j)^{Γ_ij} = t
//! ```
//!
//! Variables carry names. A variable used by several equations is committed
//! once, so all equations of a statement speak about the same witness.
//! Commitments are `C = X + r·U` and `D = Y + s·V`; each equation gets a pair
//!
//! ```text
//! π = Rᵀ B + Rᵀ Γ Y + (Rᵀ Γ S) V        θ = Sᵀ A + Sᵀ Γᵀ X
//! ```
//!
//! and is accepted when `e(A, D) e(C, B) e(C, Γ D) = t · e(U, π) · e(θ, V)`.

use std::collections::{BTreeMap, BTreeSet};

use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::Zero;
use rand::{CryptoRng, RngCore};
use rayon::prelude::*;

use crate::codec::{put_len, put_point, ElementCounts, Reader, Wire};
use crate::error::{Error, Result};
use crate::pairing::{msm, pow, random_nonzero, PairingContext, Scalar, SpotCurve, G1, G2};

/// Common reference string `(U, V)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiwiCrs<E: SpotCurve> {
    pub u: G1<E>,
    pub v: G2<E>,
}

impl<E: SpotCurve> NiwiCrs<E> {
    /// Samples `U = g1^r`, `V = g2^s` and forgets `r, s`.
    pub fn generate<R: RngCore + CryptoRng>(ctx: &PairingContext<E>, rng: &mut R) -> Self {
        let r: Scalar<E> = random_nonzero(rng);
        let s: Scalar<E> = random_nonzero(rng);
        Self::from_exponents(ctx, r, s)
    }

    pub fn from_exponents(ctx: &PairingContext<E>, r: Scalar<E>, s: Scalar<E>) -> Self {
        Self { u: pow(ctx.g1(), r), v: pow(ctx.g2(), s) }
    }

    /// Miller-loop precomputation for the two CRS elements.
    pub fn prepare(&self) -> PreparedCrs<E> {
        PreparedCrs {
            neg_u: E::G1Prepared::from((-self.u.into_group()).into_affine()),
            v: E::G2Prepared::from(self.v),
        }
    }
}

impl<E: SpotCurve> Wire for NiwiCrs<E> {
    fn encode(&self, out: &mut Vec<u8>) {
        put_point(out, &self.u);
        put_point(out, &self.v);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self { u: r.point()?, v: r.point()? })
    }

    fn counts(&self) -> ElementCounts {
        ElementCounts::new(1, 1, 0, 0)
    }
}

/// Prepared `-U` and `V`, reused across every verification under one CRS.
#[derive(Clone, Debug)]
pub struct PreparedCrs<E: SpotCurve> {
    neg_u: E::G1Prepared,
    v: E::G2Prepared,
}

/// One pairing-product equation with named variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingProductEquation<E: SpotCurve> {
    x_vars: Vec<String>,
    y_vars: Vec<String>,
    a: Vec<G1<E>>,
    b: Vec<G2<E>>,
    gamma: Vec<Vec<Scalar<E>>>,
    target: PairingOutput<E>,
}

impl<E: SpotCurve> PairingProductEquation<E> {
    pub fn new(target: PairingOutput<E>) -> Self {
        Self {
            x_vars: Vec::new(),
            y_vars: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
            gamma: Vec::new(),
            target,
        }
    }

    /// Equation whose right-hand side is the identity of G3.
    pub fn unit() -> Self {
        Self::new(PairingOutput::zero())
    }

    /// Dense form. `a` pairs with `y_vars`, `b` with `x_vars`, and `gamma`
    /// is `|x_vars| × |y_vars|`.
    pub fn from_dense(
        x_vars: Vec<String>,
        y_vars: Vec<String>,
        a: Vec<G1<E>>,
        b: Vec<G2<E>>,
        gamma: Vec<Vec<Scalar<E>>>,
        target: PairingOutput<E>,
    ) -> Result<Self> {
        let k = x_vars.len();
        let l = y_vars.len();
        if a.len() != l || b.len() != k || gamma.len() != k || gamma.iter().any(|row| row.len() != l) {
            return Err(Error::ShapeMismatch(format!(
                "equation with {k} G1 and {l} G2 variables needs |A|={l}, |B|={k}, Γ {k}x{l}"
            )));
        }
        if has_duplicates(&x_vars) || has_duplicates(&y_vars) {
            return Err(Error::ShapeMismatch("variable listed twice in one equation".into()));
        }
        Ok(Self { x_vars, y_vars, a, b, gamma, target })
    }

    /// Adds the factor `e(a, Y_name)`.
    pub fn const_var(mut self, a: G1<E>, y: &str) -> Self {
        let j = self.y_index(y);
        self.a[j] = (self.a[j] + a).into_affine();
        self
    }

    /// Adds the factor `e(X_name, b)`.
    pub fn var_const(mut self, x: &str, b: G2<E>) -> Self {
        let i = self.x_index(x);
        self.b[i] = (self.b[i] + b).into_affine();
        self
    }

    /// Adds the factor `e(X_x, Y_y)^coeff`.
    pub fn var_var(mut self, x: &str, y: &str, coeff: Scalar<E>) -> Self {
        let i = self.x_index(x);
        let j = self.y_index(y);
        self.gamma[i][j] += coeff;
        self
    }

    fn x_index(&mut self, name: &str) -> usize {
        if let Some(i) = self.x_vars.iter().position(|v| v == name) {
            return i;
        }
        self.x_vars.push(name.to_owned());
        self.b.push(G2::<E>::zero());
        self.gamma.push(vec![Scalar::<E>::zero(); self.y_vars.len()]);
        self.x_vars.len() - 1
    }

    fn y_index(&mut self, name: &str) -> usize {
        if let Some(j) = self.y_vars.iter().position(|v| v == name) {
            return j;
        }
        self.y_vars.push(name.to_owned());
        self.a.push(G1::<E>::zero());
        for row in &mut self.gamma {
            row.push(Scalar::<E>::zero());
        }
        self.y_vars.len() - 1
    }

    pub fn x_vars(&self) -> &[String] {
        &self.x_vars
    }

    pub fn y_vars(&self) -> &[String] {
        &self.y_vars
    }

    pub fn a(&self) -> &[G1<E>] {
        &self.a
    }

    pub fn b(&self) -> &[G2<E>] {
        &self.b
    }

    pub fn gamma(&self) -> &[Vec<Scalar<E>>] {
        &self.gamma
    }

    pub fn target(&self) -> PairingOutput<E> {
        self.target
    }

    /// Evaluates the left-hand side on plain (uncommitted) values.
    pub fn holds_for(&self, w: &NiwiWitness<E>) -> Result<bool> {
        let xs = w.lookup_x(&self.x_vars)?;
        let ys = w.lookup_y(&self.y_vars)?;
        let (mut left, mut right) = (Vec::new(), Vec::new());
        push_pairs::<E>(&mut left, &mut right, &self.a, &ys, &xs, &self.b);
        for (i, x) in xs.iter().enumerate() {
            let gy = gamma_row(&self.gamma[i], &ys);
            left.push(*x);
            right.push(gy);
        }
        Ok(E::multi_pairing(left, right) == self.target)
    }
}

fn has_duplicates(names: &[String]) -> bool {
    let set: BTreeSet<&String> = names.iter().collect();
    set.len() != names.len()
}

fn push_pairs<E: Pairing>(
    left: &mut Vec<E::G1Affine>,
    right: &mut Vec<E::G2Affine>,
    a: &[E::G1Affine],
    ys: &[E::G2Affine],
    xs: &[E::G1Affine],
    b: &[E::G2Affine],
) {
    for (aj, yj) in a.iter().zip(ys) {
        if !aj.is_zero() {
            left.push(*aj);
            right.push(*yj);
        }
    }
    for (xi, bi) in xs.iter().zip(b) {
        if !bi.is_zero() {
            left.push(*xi);
            right.push(*bi);
        }
    }
}

/// `Σ_j Γ_ij Y_j` for one row.
fn gamma_row<A: AffineRepr>(row: &[A::ScalarField], ys: &[A]) -> A {
    let (bases, coeffs): (Vec<A>, Vec<A::ScalarField>) =
        row.iter().zip(ys).filter(|(g, _)| !g.is_zero()).map(|(g, y)| (*y, *g)).unzip();
    msm(&bases, &coeffs)
}

/// Named witness values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NiwiWitness<E: SpotCurve> {
    pub x: BTreeMap<String, G1<E>>,
    pub y: BTreeMap<String, G2<E>>,
}

impl<E: SpotCurve> NiwiWitness<E> {
    pub fn new() -> Self {
        Self { x: BTreeMap::new(), y: BTreeMap::new() }
    }

    pub fn set_x(&mut self, name: &str, value: G1<E>) -> &mut Self {
        self.x.insert(name.to_owned(), value);
        self
    }

    pub fn set_y(&mut self, name: &str, value: G2<E>) -> &mut Self {
        self.y.insert(name.to_owned(), value);
        self
    }

    fn lookup_x(&self, names: &[String]) -> Result<Vec<G1<E>>> {
        lookup(&self.x, names)
    }

    fn lookup_y(&self, names: &[String]) -> Result<Vec<G2<E>>> {
        lookup(&self.y, names)
    }
}

fn lookup<T: Copy>(map: &BTreeMap<String, T>, names: &[String]) -> Result<Vec<T>> {
    names
        .iter()
        .map(|n| map.get(n).copied().ok_or_else(|| Error::ShapeMismatch(format!("no value for variable `{n}`"))))
        .collect()
}

/// Commitment randomness, one scalar per committed variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommitRandomness<F> {
    pub r: BTreeMap<String, F>,
    pub s: BTreeMap<String, F>,
}

impl<F: ark_ff::PrimeField> CommitRandomness<F> {
    /// Fresh randomness for every variable the equations mention, drawn in
    /// name order so the stream is reproducible.
    pub fn random<E, R>(eqs: &[PairingProductEquation<E>], rng: &mut R) -> Self
    where
        E: SpotCurve<ScalarField = F>,
        R: RngCore + CryptoRng,
    {
        let (xs, ys) = variables(eqs);
        let r = xs.into_iter().map(|n| (n, random_nonzero(rng))).collect();
        let s = ys.into_iter().map(|n| (n, random_nonzero(rng))).collect();
        Self { r, s }
    }
}

/// Names of all G1 and G2 variables, sorted.
pub fn variables<E: SpotCurve>(eqs: &[PairingProductEquation<E>]) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut xs = BTreeSet::new();
    let mut ys = BTreeSet::new();
    for eq in eqs {
        xs.extend(eq.x_vars.iter().cloned());
        ys.extend(eq.y_vars.iter().cloned());
    }
    (xs, ys)
}

/// `(π, θ)` for one equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EquationProof<E: SpotCurve> {
    pub pi: G2<E>,
    pub theta: G1<E>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiwiProof<E: SpotCurve> {
    pub c: BTreeMap<String, G1<E>>,
    pub d: BTreeMap<String, G2<E>>,
    pub equations: Vec<EquationProof<E>>,
}

impl<E: SpotCurve> NiwiProof<E> {
    pub fn commitment_counts(&self) -> ElementCounts {
        ElementCounts::new(self.c.len(), self.d.len(), 0, 0)
    }

    pub fn pair_counts(&self) -> ElementCounts {
        ElementCounts::new(self.equations.len(), self.equations.len(), 0, 0)
    }
}

impl<E: SpotCurve> Wire for NiwiProof<E> {
    fn encode(&self, out: &mut Vec<u8>) {
        put_len(out, self.c.len());
        for (name, p) in &self.c {
            put_name(out, name);
            put_point(out, p);
        }
        put_len(out, self.d.len());
        for (name, p) in &self.d {
            put_name(out, name);
            put_point(out, p);
        }
        put_len(out, self.equations.len());
        for eq in &self.equations {
            put_point(out, &eq.pi);
            put_point(out, &eq.theta);
        }
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let mut c = BTreeMap::new();
        for _ in 0..r.len_prefix()? {
            let name = take_name(r)?;
            if c.insert(name, r.point()?).is_some() {
                return Err(Error::Malformed("duplicate commitment".into()));
            }
        }
        let mut d = BTreeMap::new();
        for _ in 0..r.len_prefix()? {
            let name = take_name(r)?;
            if d.insert(name, r.point()?).is_some() {
                return Err(Error::Malformed("duplicate commitment".into()));
            }
        }
        let n = r.len_prefix()?;
        let mut equations = Vec::with_capacity(n.min(64));
        for _ in 0..n {
            equations.push(EquationProof { pi: r.point()?, theta: r.point()? });
        }
        Ok(Self { c, d, equations })
    }

    fn counts(&self) -> ElementCounts {
        self.commitment_counts() + self.pair_counts()
    }
}

fn put_name(out: &mut Vec<u8>, name: &str) {
    out.push(u8::try_from(name.len()).expect("variable names are short"));
    out.extend_from_slice(name.as_bytes());
}

fn take_name(r: &mut Reader<'_>) -> Result<String> {
    let [n] = r.take_array::<1>()?;
    let bytes = r.take(n as usize)?;
    String::from_utf8(bytes.to_vec()).map_err(|_| Error::Malformed("variable name is not utf-8".into()))
}

/// Proves with fresh commitment randomness.
pub fn prove<E, R>(
    crs: &NiwiCrs<E>,
    eqs: &[PairingProductEquation<E>],
    w: &NiwiWitness<E>,
    parallel: bool,
    rng: &mut R,
) -> Result<NiwiProof<E>>
where
    E: SpotCurve,
    R: RngCore + CryptoRng,
{
    let rand = CommitRandomness::random(eqs, rng);
    prove_with_randomness(crs, eqs, w, &rand, parallel)
}

/// Proves with caller-supplied commitment randomness. Every equation is
/// checked against the witness first.
pub fn prove_with_randomness<E: SpotCurve>(
    crs: &NiwiCrs<E>,
    eqs: &[PairingProductEquation<E>],
    w: &NiwiWitness<E>,
    rand: &CommitRandomness<Scalar<E>>,
    parallel: bool,
) -> Result<NiwiProof<E>> {
    let satisfied: Vec<Result<bool>> = maybe_par(parallel, eqs, |eq| eq.holds_for(w));
    for (i, ok) in satisfied.into_iter().enumerate() {
        if !ok? {
            return Err(Error::UnsatisfiedEquation(i));
        }
    }

    let (xs, ys) = variables(eqs);
    let xs: Vec<String> = xs.into_iter().collect();
    let ys: Vec<String> = ys.into_iter().collect();
    let rs = lookup(&rand.r, &xs)?;
    let ss = lookup(&rand.s, &ys)?;
    let x_vals = w.lookup_x(&xs)?;
    let y_vals = w.lookup_y(&ys)?;
    let idx: Vec<usize> = (0..xs.len()).collect();
    let jdx: Vec<usize> = (0..ys.len()).collect();
    let c_vals = maybe_par(parallel, &idx, |&i| (x_vals[i] + crs.u * rs[i]).into_affine());
    let d_vals = maybe_par(parallel, &jdx, |&j| (y_vals[j] + crs.v * ss[j]).into_affine());
    let c = xs.into_iter().zip(c_vals).collect();
    let d = ys.into_iter().zip(d_vals).collect();

    let pairs: Vec<Result<EquationProof<E>>> = maybe_par(parallel, eqs, |eq| equation_proof(crs, eq, w, rand));
    let equations = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(NiwiProof { c, d, equations })
}

fn equation_proof<E: SpotCurve>(
    crs: &NiwiCrs<E>,
    eq: &PairingProductEquation<E>,
    w: &NiwiWitness<E>,
    rand: &CommitRandomness<Scalar<E>>,
) -> Result<EquationProof<E>> {
    let xs = w.lookup_x(&eq.x_vars)?;
    let ys = w.lookup_y(&eq.y_vars)?;
    let r = lookup(&rand.r, &eq.x_vars)?;
    let s = lookup(&rand.s, &eq.y_vars)?;
    let (k, l) = (xs.len(), ys.len());

    // Rᵀ Γ (length l) and Γ S (length k)
    let mut r_gamma = vec![Scalar::<E>::zero(); l];
    let mut gamma_s = vec![Scalar::<E>::zero(); k];
    for i in 0..k {
        for j in 0..l {
            let g = eq.gamma[i][j];
            r_gamma[j] += r[i] * g;
            gamma_s[i] += g * s[j];
        }
    }
    let r_gamma_s: Scalar<E> = r.iter().zip(&gamma_s).map(|(a, b)| *a * b).sum();

    let mut pi_bases = eq.b.clone();
    pi_bases.extend_from_slice(&ys);
    pi_bases.push(crs.v);
    let mut pi_exps = r;
    pi_exps.extend(r_gamma);
    pi_exps.push(r_gamma_s);

    let mut theta_bases = eq.a.clone();
    theta_bases.extend_from_slice(&xs);
    let mut theta_exps = s;
    theta_exps.extend(gamma_s);

    Ok(EquationProof { pi: msm(&pi_bases, &pi_exps), theta: msm(&theta_bases, &theta_exps) })
}

/// Verifies every equation. `Ok(false)` on a rejected proof; an error when
/// the proof does not fit the statement.
pub fn verify<E: SpotCurve>(crs: &NiwiCrs<E>, eqs: &[PairingProductEquation<E>], proof: &NiwiProof<E>) -> Result<bool> {
    verify_with(crs, eqs, proof, false, None)
}

pub fn verify_with<E: SpotCurve>(
    crs: &NiwiCrs<E>,
    eqs: &[PairingProductEquation<E>],
    proof: &NiwiProof<E>,
    parallel: bool,
    prepared: Option<&PreparedCrs<E>>,
) -> Result<bool> {
    Ok(verify_each(crs, eqs, proof, parallel, prepared)?.into_iter().all(|ok| ok))
}

/// Per-equation verdicts.
pub fn verify_each<E: SpotCurve>(
    crs: &NiwiCrs<E>,
    eqs: &[PairingProductEquation<E>],
    proof: &NiwiProof<E>,
    parallel: bool,
    prepared: Option<&PreparedCrs<E>>,
) -> Result<Vec<bool>> {
    if proof.equations.len() != eqs.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} equations but {} proof pairs",
            eqs.len(),
            proof.equations.len()
        )));
    }
    let (xs, ys) = variables(eqs);
    if xs.len() != proof.c.len() || ys.len() != proof.d.len() {
        return Err(Error::ShapeMismatch("commitment table does not match the statement".into()));
    }
    let items: Vec<(&PairingProductEquation<E>, &EquationProof<E>)> = eqs.iter().zip(&proof.equations).collect();
    maybe_par(parallel, &items, |(eq, ep)| equation_holds(crs, eq, &proof.c, &proof.d, ep, prepared))
        .into_iter()
        .collect()
}

/// `e(A, D) e(C, B) e(C, Γ D) e(-U, π) e(-θ, V) = t`.
pub fn equation_holds<E: SpotCurve>(
    crs: &NiwiCrs<E>,
    eq: &PairingProductEquation<E>,
    c: &BTreeMap<String, G1<E>>,
    d: &BTreeMap<String, G2<E>>,
    ep: &EquationProof<E>,
    prepared: Option<&PreparedCrs<E>>,
) -> Result<bool> {
    let cs = lookup(c, &eq.x_vars)?;
    let ds = lookup(d, &eq.y_vars)?;
    let (mut left, mut right) = (Vec::new(), Vec::new());
    push_pairs::<E>(&mut left, &mut right, &eq.a, &ds, &cs, &eq.b);
    for (i, ci) in cs.iter().enumerate() {
        if eq.gamma[i].iter().any(|g| !g.is_zero()) {
            left.push(*ci);
            right.push(gamma_row(&eq.gamma[i], &ds));
        }
    }
    let mut g1: Vec<E::G1Prepared> = left.into_iter().map(Into::into).collect();
    let mut g2: Vec<E::G2Prepared> = right.into_iter().map(Into::into).collect();
    let neg_theta = (-ep.theta.into_group()).into_affine();
    match prepared {
        Some(p) => {
            g1.extend([neg_theta.into(), p.neg_u.clone()]);
            g2.extend([p.v.clone(), ep.pi.into()]);
        }
        None => {
            g1.extend([neg_theta.into(), (-crs.u.into_group()).into_affine().into()]);
            g2.extend([crs.v.into(), ep.pi.into()]);
        }
    }
    let ml = E::multi_miller_loop(g1, g2);
    Ok(E::final_exponentiation(ml).is_some_and(|out| out == eq.target))
}

fn maybe_par<T: Sync, U: Send>(parallel: bool, items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{random_element, seeded_rng, SecurityLevel};
    use ark_bn254::Bn254;
    use ark_ff::One;
    use rand::Rng;

    type E = Bn254;

    fn setup(seed: &[u8]) -> (PairingContext<E>, NiwiCrs<E>, rand_chacha::ChaCha20Rng) {
        let ctx = PairingContext::<E>::setup(SecurityLevel::Bits112, b"niwi").unwrap();
        let mut rng = seeded_rng(seed);
        let crs = NiwiCrs::generate(&ctx, &mut rng);
        (ctx, crs, rng)
    }

    /// A random satisfiable system: random witness and coefficients, target
    /// computed from the witness.
    fn random_system<R: RngCore + CryptoRng>(
        ctx: &PairingContext<E>,
        rng: &mut R,
    ) -> (Vec<PairingProductEquation<E>>, NiwiWitness<E>) {
        let k = rng.gen_range(0..=4);
        let l = rng.gen_range(0..=4);
        let mut w = NiwiWitness::new();
        let xs: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
        let ys: Vec<String> = (0..l).map(|j| format!("y{j}")).collect();
        for n in &xs {
            w.set_x(n, random_element(ctx.g1(), rng));
        }
        for n in &ys {
            w.set_y(n, random_element(ctx.g2(), rng));
        }
        let eqs = (0..rng.gen_range(1..=4))
            .map(|_| {
                let mut eq = PairingProductEquation::unit();
                for n in &ys {
                    if rng.gen_bool(0.6) {
                        eq = eq.const_var(random_element(ctx.g1(), rng), n);
                    }
                }
                for n in &xs {
                    if rng.gen_bool(0.6) {
                        eq = eq.var_const(n, random_element(ctx.g2(), rng));
                    }
                    for m in &ys {
                        if rng.gen_bool(0.5) {
                            eq = eq.var_var(n, m, random_nonzero(rng));
                        }
                    }
                }
                let lhs = {
                    let mut probe = eq.clone();
                    probe.target = PairingOutput::zero();
                    lhs_value(&probe, &w)
                };
                eq.target = lhs;
                eq
            })
            .collect();
        (eqs, w)
    }

    fn lhs_value(eq: &PairingProductEquation<E>, w: &NiwiWitness<E>) -> PairingOutput<E> {
        let xs = w.lookup_x(&eq.x_vars).unwrap();
        let ys = w.lookup_y(&eq.y_vars).unwrap();
        let mut acc = PairingOutput::<E>::zero();
        for (a, y) in eq.a.iter().zip(&ys) {
            acc += E::pairing(*a, *y);
        }
        for (x, b) in xs.iter().zip(&eq.b) {
            acc += E::pairing(*x, *b);
        }
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                acc += E::pairing(*x, *y) * eq.gamma[i][j];
            }
        }
        acc
    }

    #[test]
    fn crs_elements_are_nontrivial_and_seed_dependent() {
        let (_, a, _) = setup(b"a");
        let (_, b, _) = setup(b"b");
        assert!(!a.u.is_zero() && !a.v.is_zero());
        assert_ne!(a, b);
    }

    #[test]
    fn empty_statement_verifies() {
        let (_, crs, mut rng) = setup(b"empty");
        let eqs = vec![PairingProductEquation::<E>::unit()];
        let proof = prove(&crs, &eqs, &NiwiWitness::new(), false, &mut rng).unwrap();
        assert!(proof.c.is_empty() && proof.d.is_empty());
        assert!(verify(&crs, &eqs, &proof).unwrap());
    }

    #[test]
    fn linear_equation_verifies() {
        let (ctx, crs, mut rng) = setup(b"linear");
        let x = random_element(ctx.g1(), &mut rng);
        let b = random_element(ctx.g2(), &mut rng);
        let eqs = vec![PairingProductEquation::new(E::pairing(x, b)).var_const("x", b)];
        let mut w = NiwiWitness::new();
        w.set_x("x", x);
        let proof = prove(&crs, &eqs, &w, false, &mut rng).unwrap();
        assert!(verify(&crs, &eqs, &proof).unwrap());
    }

    #[test]
    fn random_systems_round_trip() {
        let (ctx, crs, mut rng) = setup(b"random");
        let prepared = crs.prepare();
        for _ in 0..100 {
            let (eqs, w) = random_system(&ctx, &mut rng);
            let proof = prove(&crs, &eqs, &w, false, &mut rng).unwrap();
            assert!(verify(&crs, &eqs, &proof).unwrap());
            assert!(verify_with(&crs, &eqs, &proof, true, Some(&prepared)).unwrap());
        }
    }

    #[test]
    fn parallel_prover_matches_sequential() {
        let (ctx, crs, mut rng) = setup(b"par");
        let (eqs, w) = random_system(&ctx, &mut rng);
        let rand = CommitRandomness::random(&eqs, &mut rng);
        let seq = prove_with_randomness(&crs, &eqs, &w, &rand, false).unwrap();
        let par = prove_with_randomness(&crs, &eqs, &w, &rand, true).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn unsatisfied_witness_is_refused() {
        let (ctx, crs, mut rng) = setup(b"unsat");
        let x = random_element(ctx.g1(), &mut rng);
        let b = random_element(ctx.g2(), &mut rng);
        let eqs = vec![
            PairingProductEquation::unit(),
            PairingProductEquation::new(E::pairing(x, b)).var_const("x", b),
        ];
        let mut w = NiwiWitness::new();
        w.set_x("x", random_element(ctx.g1(), &mut rng));
        assert_eq!(prove(&crs, &eqs, &w, false, &mut rng), Err(Error::UnsatisfiedEquation(1)));
    }

    #[test]
    fn reproving_rerandomizes_everything() {
        let (ctx, crs, mut rng) = setup(b"rerand");
        let x = random_element(ctx.g1(), &mut rng);
        let y = random_element(ctx.g2(), &mut rng);
        let eqs = vec![PairingProductEquation::new(E::pairing(x, y)).var_var("x", "y", Scalar::<E>::one())];
        let mut w = NiwiWitness::new();
        w.set_x("x", x).set_y("y", y);
        let p1 = prove(&crs, &eqs, &w, false, &mut rng).unwrap();
        let p2 = prove(&crs, &eqs, &w, false, &mut rng).unwrap();
        assert_ne!(p1.c["x"], p2.c["x"]);
        assert_ne!(p1.d["y"], p2.d["y"]);
        assert_ne!(p1.equations[0].pi, p2.equations[0].pi);
        assert_ne!(p1.equations[0].theta, p2.equations[0].theta);
        assert!(verify(&crs, &eqs, &p1).unwrap() && verify(&crs, &eqs, &p2).unwrap());
    }

    #[test]
    fn two_witnesses_give_same_shape() {
        let (ctx, crs, mut rng) = setup(b"wi");
        let k: Scalar<E> = random_nonzero(&mut rng);
        let eqs = vec![PairingProductEquation::new(ctx.gt() * k).var_var("x", "y", Scalar::<E>::one())];
        let mut w1 = NiwiWitness::new();
        w1.set_x("x", pow(ctx.g1(), k)).set_y("y", ctx.g2());
        let mut w2 = NiwiWitness::new();
        w2.set_x("x", ctx.g1()).set_y("y", pow(ctx.g2(), k));
        let p1 = prove(&crs, &eqs, &w1, false, &mut rng).unwrap();
        let p2 = prove(&crs, &eqs, &w2, false, &mut rng).unwrap();
        assert!(verify(&crs, &eqs, &p1).unwrap() && verify(&crs, &eqs, &p2).unwrap());
        assert_eq!(p1.counts(), p2.counts());
        assert_eq!(p1.to_wire().len(), p2.to_wire().len());
    }

    #[test]
    fn perturbed_pi_rejects_only_its_equation() {
        let (ctx, crs, mut rng) = setup(b"perturb");
        let (mut eqs, w) = random_system(&ctx, &mut rng);
        while eqs.len() < 2 {
            eqs.push(PairingProductEquation::unit());
        }
        let mut proof = prove(&crs, &eqs, &w, false, &mut rng).unwrap();
        proof.equations[0].pi = (proof.equations[0].pi + ctx.g2()).into_affine();
        let verdicts = verify_each(&crs, &eqs, &proof, false, None).unwrap();
        assert!(!verdicts[0]);
        assert!(verdicts[1..].iter().all(|v| *v));
    }

    #[test]
    fn perturbed_commitment_rejects() {
        let (ctx, crs, mut rng) = setup(b"commit");
        let x = random_element(ctx.g1(), &mut rng);
        let y = random_element(ctx.g2(), &mut rng);
        let eqs = vec![PairingProductEquation::new(E::pairing(x, y)).var_var("x", "y", Scalar::<E>::one())];
        let mut w = NiwiWitness::new();
        w.set_x("x", x).set_y("y", y);
        let proof = prove(&crs, &eqs, &w, false, &mut rng).unwrap();
        let mut bad = proof.clone();
        bad.c.insert("x".into(), (proof.c["x"] + ctx.g1()).into_affine());
        assert!(!verify(&crs, &eqs, &bad).unwrap());
        let mut bad = proof;
        bad.d.insert("y".into(), (bad.d["y"] + ctx.g2()).into_affine());
        assert!(!verify(&crs, &eqs, &bad).unwrap());
    }

    #[test]
    fn shared_variable_is_committed_once() {
        let (ctx, crs, mut rng) = setup(b"shared");
        let x = random_element(ctx.g1(), &mut rng);
        let b1 = random_element(ctx.g2(), &mut rng);
        let b2 = random_element(ctx.g2(), &mut rng);
        let eqs = vec![
            PairingProductEquation::new(E::pairing(x, b1)).var_const("x", b1),
            PairingProductEquation::new(E::pairing(x, b2)).var_const("x", b2),
        ];
        let mut w = NiwiWitness::new();
        w.set_x("x", x);
        let proof = prove(&crs, &eqs, &w, false, &mut rng).unwrap();
        assert_eq!(proof.c.len(), 1);
        assert!(verify(&crs, &eqs, &proof).unwrap());
    }

    #[test]
    fn shape_errors() {
        let (ctx, crs, mut rng) = setup(b"shape");
        let (eqs, w) = random_system(&ctx, &mut rng);
        let proof = prove(&crs, &eqs, &w, false, &mut rng).unwrap();
        let mut short = proof.clone();
        short.equations.pop();
        assert!(matches!(verify(&crs, &eqs, &short), Err(Error::ShapeMismatch(_))));
        let bad = PairingProductEquation::<E>::from_dense(
            vec!["x".into()],
            vec![],
            vec![],
            vec![],
            vec![vec![]],
            PairingOutput::zero(),
        );
        assert!(matches!(bad, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn proof_wire_round_trip() {
        let (ctx, crs, mut rng) = setup(b"wire");
        for _ in 0..10 {
            let (eqs, w) = random_system(&ctx, &mut rng);
            let proof = prove(&crs, &eqs, &w, false, &mut rng).unwrap();
            let bytes = proof.to_wire();
            assert_eq!(NiwiProof::<E>::from_wire(&bytes).unwrap(), proof);
            assert_eq!(
                bytes.len(),
                proof.counts().byte_len::<E>() + 12 + proof.c.len() * 3 + proof.d.len() * 3
            );
        }
        assert_eq!(NiwiCrs::<E>::from_wire(&crs.to_wire()).unwrap(), crs);
    }
}
