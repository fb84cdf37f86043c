//! Second-quantized spin-1/2 formalism for two particles built from ladder operators.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{
    act_on_vacuum, normal_order, vev, AlgebraError, Coeff, Expr, Generator, Qi2, RewriteRules, Scalar,
    Statistics, Vacuum,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpinError {
    #[error("axis is not a unit vector (|n|² − 1 = {0:e})")]
    NonUnitAxis(f64),
    #[error("rotation is not unitary (deviation {0:e})")]
    NonUnitary(f64),
    #[error("component must be 1, 2 or 3, got {0}")]
    BadComponent(usize),
    #[error("triplet projection must be −1, 0 or +1, got {0}")]
    BadProjection(i32),
    #[error("absolute value of `{0}` is not representable")]
    NoAbsoluteValue(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

/// Unit 3-vector, exact or floating.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitAxis<C>(pub [C; 3]);

impl UnitAxis<Scalar> {
    /// Exact axis with components in ℚ(√2); the norm is checked exactly.
    pub fn exact(n: [Qi2; 3]) -> Result<Self, SpinError> {
        let norm = n.iter().fold(Qi2::zero(), |acc, x| acc + x.clone() * x.clone());
        if n.iter().any(|x| !x.is_real()) || norm != Qi2::one() {
            return Err(SpinError::NonUnitAxis((norm - Qi2::one()).to_complex().norm()));
        }
        Ok(Self(n.map(Scalar::constant)))
    }

    pub fn x() -> Self {
        Self::exact([Qi2::one(), Qi2::zero(), Qi2::zero()]).unwrap()
    }

    pub fn y() -> Self {
        Self::exact([Qi2::zero(), Qi2::one(), Qi2::zero()]).unwrap()
    }

    pub fn z() -> Self {
        Self::exact([Qi2::zero(), Qi2::zero(), Qi2::one()]).unwrap()
    }

    /// `(X + sZ)/√2` for `s = ±1`.
    pub fn diagonal_xz(s: i64) -> Self {
        let h = Qi2::inv_sqrt2();
        Self::exact([h.clone(), Qi2::zero(), h.scale(s, 1)]).unwrap()
    }
}

impl UnitAxis<Complex64> {
    /// Floating axis; must be unit within 10⁻¹².
    pub fn new(n: [f64; 3]) -> Result<Self, SpinError> {
        let dev = n.iter().map(|x| x * x).sum::<f64>() - 1.0;
        if !n.iter().all(|x| x.is_finite()) || dev.abs() > 1e-12 {
            return Err(SpinError::NonUnitAxis(dev));
        }
        Ok(Self(n.map(|x| Complex64::new(x, 0.0))))
    }
}

/// Measurement axes `C, C′` for particle A and `D, D′` for particle B.
#[derive(Clone, Debug)]
pub struct ChshAxes<C> {
    pub c: UnitAxis<C>,
    pub c_prime: UnitAxis<C>,
    pub d: UnitAxis<C>,
    pub d_prime: UnitAxis<C>,
}

impl ChshAxes<Scalar> {
    /// `C = Z, C′ = X, D = (X+Z)/√2, D′ = (X−Z)/√2`.
    pub fn canonical() -> Self {
        Self {
            c: UnitAxis::z(),
            c_prime: UnitAxis::x(),
            d: UnitAxis::diagonal_xz(1),
            d_prime: UnitAxis::diagonal_xz(-1),
        }
    }
}

/// 2×2 unitary acting on the spin basis of one particle.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation<C>(pub [[C; 2]; 2]);

fn unitarity_defect<C: Coeff>(u: &[[C; 2]; 2]) -> Option<f64> {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = C::zero();
            for k in 0..2 {
                s = s + u[k][i].conj() * u[k][j].clone();
            }
            let target = if i == j { C::one() } else { C::zero() };
            worst = worst.max((s - target).to_complex()?.norm());
        }
    }
    Some(worst)
}

impl Rotation<Scalar> {
    pub fn exact(u: [[Qi2; 2]; 2]) -> Result<Self, SpinError> {
        let m = u.clone().map(|r| r.map(Scalar::constant));
        let dev = unitarity_defect(&m).unwrap_or(f64::INFINITY);
        // exact entries: any nonzero defect is a genuine failure
        let exact_ok = {
            let mut ok = true;
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = Qi2::zero();
                    for k in 0..2 {
                        s = s + u[k][i].conj() * u[k][j].clone();
                    }
                    ok &= s == if i == j { Qi2::one() } else { Qi2::zero() };
                }
            }
            ok
        };
        if !exact_ok {
            return Err(SpinError::NonUnitary(dev));
        }
        Ok(Self(m))
    }
}

impl Rotation<Complex64> {
    pub fn new(u: [[Complex64; 2]; 2]) -> Result<Self, SpinError> {
        let dev = unitarity_defect(&u).unwrap_or(f64::INFINITY);
        if !(dev <= 1e-12) {
            return Err(SpinError::NonUnitary(dev));
        }
        Ok(Self(u))
    }
}

/// A state `normalization · creator |0⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateExpr<C> {
    pub creator: Expr<C>,
    pub normalization: C,
}

/// Largest deviation of near-particle marginals under far-particle basis changes.
#[derive(Clone, Debug, Serialize)]
pub struct CausalityReport {
    pub rotations: usize,
    pub max_deviation: f64,
    pub exact_zero: bool,
}

/// Ladder generators, rules and vacuum for particles of kinds `a` and `b`.
#[derive(Clone, Debug)]
pub struct SpinSystem {
    pub statistics: Statistics,
    pub rules: RewriteRules,
    pub vacuum: Vacuum,
}

impl SpinSystem {
    pub fn new(statistics: Statistics) -> Self {
        let gens = Self::annihilators(statistics);
        Self { statistics, rules: RewriteRules::canonical(&gens, statistics), vacuum: Vacuum::new(gens) }
    }

    pub fn bosonic() -> Self {
        Self::new(Statistics::Bosonic)
    }

    pub fn fermionic() -> Self {
        Self::new(Statistics::Fermionic)
    }

    pub fn annihilators(s: Statistics) -> Vec<Generator> {
        vec![Generator::a(1, s), Generator::a(2, s), Generator::b(1, s), Generator::b(2, s)]
    }

    /// Annihilator of `party` with spin index `mode` (1 = up, 2 = down).
    pub fn ladder(&self, party: Party, mode: u8) -> Generator {
        match party {
            Party::A => Generator::a(mode, self.statistics),
            Party::B => Generator::b(mode, self.statistics),
        }
    }

    fn bilinear<C: Coeff>(&self, party: Party, i: u8, j: u8) -> Expr<C> {
        Expr::word(vec![self.ladder(party, i).dag(), self.ladder(party, j)])
    }

    /// `S₁ = ½(c₁†c₂ + c₂†c₁)`, `S₂ = (i/2)(c₂†c₁ − c₁†c₂)`, `S₃ = ½(c₁†c₁ − c₂†c₂)`.
    pub fn spin_operator<C: Coeff>(&self, party: Party, component: usize) -> Result<Expr<C>, SpinError> {
        let half = Qi2::rational(1, 2);
        let e = match component {
            1 => self.bilinear(party, 1, 2) + self.bilinear(party, 2, 1),
            2 => (self.bilinear(party, 2, 1) - self.bilinear(party, 1, 2)).scale_exact(&Qi2::i()),
            3 => self.bilinear(party, 1, 1) - self.bilinear(party, 2, 2),
            k => return Err(SpinError::BadComponent(k)),
        };
        Ok(e.scale_exact(&half))
    }

    /// Total spin `S_k = S_k^A + S_k^B`.
    pub fn total_spin<C: Coeff>(&self, component: usize) -> Result<Expr<C>, SpinError> {
        Ok(self.spin_operator(Party::A, component)? + self.spin_operator(Party::B, component)?)
    }

    /// `n · S` for one party.
    pub fn spin_along<C: Coeff>(&self, party: Party, axis: &UnitAxis<C>) -> Expr<C> {
        let mut out = Expr::zero();
        for (k, n) in axis.0.iter().enumerate() {
            let s: Expr<C> = self.spin_operator(party, k + 1).expect("component in range");
            out = out + s.scale(n);
        }
        out
    }

    /// `(a₁†b₂† − a₂†b₁†)|0⟩/√2`.
    pub fn singlet<C: Coeff>(&self) -> StateExpr<C> {
        let creator = self.pair(1, 2) - self.pair(2, 1);
        StateExpr { creator, normalization: C::from_exact(&Qi2::inv_sqrt2()) }
    }

    /// Triplet with total `S₃ = m`.
    pub fn triplet<C: Coeff>(&self, m: i32) -> Result<StateExpr<C>, SpinError> {
        Ok(match m {
            1 => StateExpr { creator: self.pair(1, 1), normalization: C::one() },
            0 => StateExpr { creator: self.pair(1, 2) + self.pair(2, 1), normalization: C::from_exact(&Qi2::inv_sqrt2()) },
            -1 => StateExpr { creator: self.pair(2, 2), normalization: C::one() },
            m => return Err(SpinError::BadProjection(m)),
        })
    }

    /// `a_i† b_j†` as a creator word.
    pub fn pair<C: Coeff>(&self, i: u8, j: u8) -> Expr<C> {
        Expr::word(vec![self.ladder(Party::A, i).dag(), self.ladder(Party::B, j).dag()])
    }

    /// Two-particle state `Σ c_ij a_i† b_j† |0⟩` from a row-major coefficient list.
    pub fn product_basis_state<C: Coeff>(&self, c: &[C; 4]) -> StateExpr<C> {
        let mut creator = Expr::zero();
        for (k, v) in c.iter().enumerate() {
            creator = creator + self.pair::<C>(k as u8 / 2 + 1, k as u8 % 2 + 1).scale(v);
        }
        StateExpr { creator, normalization: C::one() }
    }

    /// `op |state⟩` as a creator polynomial (normalization folded in).
    pub fn apply<C: Coeff>(&self, op: &Expr<C>, state: &StateExpr<C>) -> Result<Expr<C>, SpinError> {
        let x = op.times(&state.creator).scale(&state.normalization);
        Ok(act_on_vacuum(&x, &self.rules, &self.vacuum)?)
    }

    pub fn norm_sqr<C: Coeff>(&self, state: &StateExpr<C>) -> Result<C, SpinError> {
        self.expectation(state, &Expr::one())
    }

    /// `⟨state| obs |state⟩`.
    pub fn expectation<C: Coeff>(&self, state: &StateExpr<C>, obs: &Expr<C>) -> Result<C, SpinError> {
        let x = state.creator.adjoint().times(obs).times(&state.creator);
        let n = state.normalization.conj() * state.normalization.clone();
        Ok(vev(&x, &self.rules, &self.vacuum)? * n)
    }

    /// `E(m, n)`: product expectation of the two spin projections, rescaled by 4 so that
    /// perfect (anti)correlation is ±1.
    pub fn correlation<C: Coeff>(&self, state: &StateExpr<C>, m: &UnitAxis<C>, n: &UnitAxis<C>) -> Result<C, SpinError> {
        let obs = self.spin_along(Party::A, m).times(&self.spin_along(Party::B, n));
        Ok(self.expectation(state, &obs)? * C::from_exact(&Qi2::int(4)))
    }

    /// `T_kl = E(e_k, e_l)`; by bilinearity `E(m, n) = Σ m_k T_kl n_l`.
    pub fn correlation_tensor<C: Coeff>(&self, state: &StateExpr<C>) -> Result<[[C; 3]; 3], SpinError> {
        let axis = |k: usize| UnitAxis(std::array::from_fn(|j| if j == k { C::one() } else { C::zero() }));
        let mut t: [[C; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| C::zero()));
        for (k, row) in t.iter_mut().enumerate() {
            for (l, entry) in row.iter_mut().enumerate() {
                *entry = self.correlation(state, &axis(k), &axis(l))?;
            }
        }
        Ok(t)
    }

    /// Signed CHSH combination `E(C,D) − E(C,D′) + E(C′,D) + E(C′,D′)`.
    pub fn chsh_signed<C: Coeff>(&self, state: &StateExpr<C>, axes: &ChshAxes<C>) -> Result<C, SpinError> {
        Ok(self.correlation(state, &axes.c, &axes.d)? - self.correlation(state, &axes.c, &axes.d_prime)?
            + self.correlation(state, &axes.c_prime, &axes.d)?
            + self.correlation(state, &axes.c_prime, &axes.d_prime)?)
    }

    /// `F = |E(C,D) − E(C,D′) + E(C′,D) + E(C′,D′)|`.
    pub fn chsh<C: Coeff>(&self, state: &StateExpr<C>, axes: &ChshAxes<C>) -> Result<C, SpinError> {
        let s = self.chsh_signed(state, axes)?;
        s.abs_value().ok_or_else(|| SpinError::NoAbsoluteValue(s.to_string()))
    }

    /// Annihilator of the rotated basis state `k` (1-based): `c'_k = Σ_j conj(U_jk) c_j`.
    fn rotated<C: Coeff>(&self, party: Party, u: &Rotation<C>, k: usize) -> Expr<C> {
        let mut out = Expr::zero();
        for j in 0..2 {
            out = out + Expr::gen(self.ladder(party, j as u8 + 1)).scale(&u.0[j][k - 1].conj());
        }
        out
    }

    /// Probability that `party`, measuring in the basis given by the columns of `u`,
    /// finds outcome `+` (first column) or `−`, summed over the other particle's
    /// measurement basis given by `far`.
    pub fn joint_marginal<C: Coeff>(
        &self,
        state: &StateExpr<C>,
        party: Party,
        u: &Rotation<C>,
        far: &Rotation<C>,
        plus: bool,
    ) -> Result<C, SpinError> {
        let near = self.rotated(party, u, if plus { 1 } else { 2 });
        let mut total = C::zero();
        for k in 1..=2 {
            let other = self.rotated(party.other(), far, k);
            let amp_op = match party {
                Party::A => other.times(&near),
                Party::B => near.times(&other),
            };
            let amp = vev(&amp_op.times(&state.creator), &self.rules, &self.vacuum)? * state.normalization.clone();
            total = total + amp.conj() * amp;
        }
        Ok(total)
    }

    /// Probability of outcome `±` for `party` in the rotated basis, summing over the
    /// other particle's standard basis.
    pub fn measurement_probability<C: Coeff>(
        &self,
        state: &StateExpr<C>,
        party: Party,
        rotation: &Rotation<C>,
        plus: bool,
    ) -> Result<C, SpinError> {
        self.joint_marginal(state, party, rotation, &identity_rotation(), plus)
    }

    /// For every rotation of particle B's basis, compares particle A's Z-basis marginals
    /// with those obtained in B's standard basis.
    pub fn causality_check<C: Coeff>(&self, state: &StateExpr<C>, rotations: &[Rotation<C>]) -> Result<CausalityReport, SpinError> {
        let id = identity_rotation::<C>();
        let base = [
            self.joint_marginal(state, Party::A, &id, &id, true)?,
            self.joint_marginal(state, Party::A, &id, &id, false)?,
        ];
        let mut worst = 0.0f64;
        let mut exact_zero = true;
        for u in rotations {
            for (plus, b) in [(true, &base[0]), (false, &base[1])] {
                let p = self.joint_marginal(state, Party::A, &id, u, plus)?;
                let d = p - b.clone();
                exact_zero &= d.is_zero();
                worst = worst.max(d.to_complex().map(|z| z.norm()).unwrap_or(f64::INFINITY));
            }
        }
        Ok(CausalityReport { rotations: rotations.len(), max_deviation: worst, exact_zero })
    }

    /// Normal-ordered `[x, y]`.
    pub fn commutator<C: Coeff>(&self, x: &Expr<C>, y: &Expr<C>) -> Result<Expr<C>, SpinError> {
        Ok(normal_order(&Expr::commutator(x, y), &self.rules)?)
    }
}

pub fn identity_rotation<C: Coeff>() -> Rotation<C> {
    Rotation([[C::one(), C::zero()], [C::zero(), C::one()]])
}

/// Levi-Civita symbol on 1-based indices.
pub fn levi_civita(i: usize, j: usize, k: usize) -> i64 {
    match (i, j, k) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1,
        _ => 0,
    }
}

/// Checks `[S_i, S_j] = iε_ijk S_k` for both parties and `[S_i^A, S_j^B] = 0`.
pub fn su2_identities_hold(sys: &SpinSystem) -> Result<bool, SpinError> {
    for party in [Party::A, Party::B] {
        for i in 1..=3 {
            for j in 1..=3 {
                let si: Expr<Scalar> = sys.spin_operator(party, i)?;
                let sj = sys.spin_operator(party, j)?;
                let lhs = sys.commutator(&si, &sj)?;
                let mut rhs = Expr::zero();
                for k in 1..=3 {
                    let e = levi_civita(i, j, k);
                    if e != 0 {
                        rhs = rhs + sys.spin_operator::<Scalar>(party, k)?.scale_exact(&(Qi2::i() * Qi2::int(e)));
                    }
                }
                if lhs != normal_order(&rhs, &sys.rules)? {
                    return Ok(false);
                }
                let sb: Expr<Scalar> = sys.spin_operator(party.other(), j)?;
                if !sys.commutator(&si, &sb)?.is_zero() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_chsh_is_two_sqrt_two() {
        for sys in [SpinSystem::bosonic(), SpinSystem::fermionic()] {
            let s = sys.singlet::<Scalar>();
            let f = sys.chsh(&s, &ChshAxes::canonical()).unwrap();
            assert_eq!(f, Scalar::constant(Qi2::sqrt2().scale(2, 1)));
            assert_eq!(f.to_string(), "2*sqrt2");
        }
    }

    #[test]
    fn su2_algebra_exact() {
        assert!(su2_identities_hold(&SpinSystem::bosonic()).unwrap());
        assert!(su2_identities_hold(&SpinSystem::fermionic()).unwrap());
    }

    #[test]
    fn singlet_is_annihilated_by_total_spin() {
        let sys = SpinSystem::bosonic();
        let s = sys.singlet::<Scalar>();
        for k in 1..=3 {
            let op = sys.total_spin::<Scalar>(k).unwrap();
            assert!(sys.apply(&op, &s).unwrap().is_zero());
        }
        assert_eq!(sys.norm_sqr(&s).unwrap(), Scalar::one());
    }

    #[test]
    fn up_up_state_has_total_spin_one() {
        let sys = SpinSystem::bosonic();
        let s = sys.triplet::<Scalar>(1).unwrap();
        let r = sys.apply(&sys.total_spin(3).unwrap(), &s).unwrap();
        assert_eq!(r, s.creator);
    }

    #[test]
    fn single_particle_eigenvalue() {
        let sys = SpinSystem::bosonic();
        let s = StateExpr { creator: Expr::gen(sys.ladder(Party::A, 1).dag()), normalization: Scalar::one() };
        let v = sys.expectation(&s, &sys.spin_operator(Party::A, 3).unwrap()).unwrap();
        assert_eq!(v, Scalar::constant(Qi2::rational(1, 2)));
    }

    #[test]
    fn singlet_zz_expectation() {
        let sys = SpinSystem::bosonic();
        let s = sys.singlet::<Scalar>();
        let op = sys.spin_operator::<Scalar>(Party::A, 3).unwrap().times(&sys.spin_operator(Party::B, 3).unwrap());
        assert_eq!(sys.expectation(&s, &op).unwrap(), Scalar::constant(Qi2::rational(-1, 4)));
        assert!(sys.expectation(&s, &sys.spin_operator(Party::A, 3).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn degenerate_axes_give_zero() {
        let sys = SpinSystem::bosonic();
        let axes = ChshAxes { c: UnitAxis::z(), c_prime: UnitAxis::x(), d: UnitAxis::z(), d_prime: UnitAxis::z() };
        assert!(sys.chsh(&sys.singlet(), &axes).unwrap().is_zero());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(UnitAxis::new([1.0, 1.0, 0.0]).is_err());
        assert!(UnitAxis::exact([Qi2::one(), Qi2::one(), Qi2::zero()]).is_err());
        let two = Complex64::new(2.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        assert!(Rotation::new([[two, z], [z, two]]).is_err());
    }

    #[test]
    fn exact_causality_for_hadamard_rotation() {
        let sys = SpinSystem::bosonic();
        let h = Qi2::inv_sqrt2();
        let u = Rotation::exact([[h.clone(), h.clone()], [-h.clone(), h]]).unwrap();
        let rep = sys.causality_check(&sys.singlet::<Scalar>(), &[u]).unwrap();
        assert!(rep.exact_zero);
    }

    #[test]
    fn definite_up_probability() {
        let sys = SpinSystem::bosonic();
        let s = sys.triplet::<Scalar>(1).unwrap();
        let p = sys.measurement_probability(&s, Party::A, &identity_rotation(), true).unwrap();
        assert_eq!(p, Scalar::one());
        let q = sys.measurement_probability(&sys.singlet::<Scalar>(), Party::A, &identity_rotation(), true).unwrap();
        assert_eq!(q, Scalar::constant(Qi2::rational(1, 2)));
    }
}
