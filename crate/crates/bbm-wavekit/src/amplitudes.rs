//! Oscillatory amplitudes attached to interaction trees.
//!
//! A tree with leaf frequencies ξ⃗ = (ξ₁,…,ξ_{n+1}) carries at each internal
//! node m the frequency data of the interaction performed there: ζ_m is the
//! sum of the leaf frequencies below m, ω_A(m) = ω(ζ_m), and
//! Δ_A(m) = ω(ζ_m) − ω(ζ_{m₁}) − ω(ζ_{m₂}) over its two children. The
//! time-ordered amplitude of an ordered tree is the iterated integral
//!
//!   F_A^σ(t, ξ⃗) = ∫_{0≤t₁≤…≤t_n≤t} Π_m ω_A(σ(m)) e^{iΔ_A(σ(m)) t_m} dt⃗,
//!
//! evaluated exactly as an [`ExpPoly`]. For even node count the pairing
//! delta δ(Δ(σ(2j−1)) + Δ(σ(2j))) — decided in exact rational arithmetic —
//! selects the leading secular part F̃, and summing the surviving diagrams
//! against a random field yields the paired-tree fields G and their scalar
//! profiles U that drive the effective phase flow.

use num_rational::Ratio;
use num_traits::Zero;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exp_poly::{big_ratio, ExpPoly};
use crate::field::{C64, SpectralField};
use crate::quadrature::integrate_c64;
use crate::torus::{delta3, omega, TorusSpec, Wavenumber};
use crate::trees::{admissible_orders, enumerate_trees, NodePath, OrderedTree, Tree};
use crate::util::ratio_to_f64;

// ─── decorated trees ───

/// Per-node frequency data for a tree whose leaves carry integer modes.
pub struct TreeData<'a> {
    spec: &'a TorusSpec,
    /// Subtree mode sums for every node, leaves included.
    sums: BTreeMap<NodePath, i64>,
}

impl<'a> TreeData<'a> {
    /// Leaves are read left to right; every leaf mode must be nonzero
    /// (internal sums may vanish — the corresponding ω factor is then 0).
    pub fn new(spec: &'a TorusSpec, tree: &Tree, leaf_k: &[i64]) -> Result<Self> {
        let leaves = tree.leaves();
        if leaves.len() != leaf_k.len() {
            return Err(Error::config(format!(
                "tree has {} leaves but {} frequencies were supplied",
                leaves.len(),
                leaf_k.len()
            )));
        }
        if let Some(pos) = leaf_k.iter().position(|&k| k == 0) {
            return Err(Error::config(format!("leaf frequency {pos} is zero")));
        }
        let mut sums = BTreeMap::new();
        for (path, &k) in leaves.iter().zip(leaf_k) {
            sums.insert(path.clone(), k);
        }
        for path in tree.internal_nodes().into_iter().rev() {
            let mut total = 0i64;
            for step in [1u8, 2u8] {
                let mut child = path.clone();
                child.push(step);
                total += sums[&child];
            }
            sums.insert(path, total);
        }
        Ok(TreeData { spec, sums })
    }

    pub fn sum(&self, path: &[u8]) -> i64 {
        self.sums[path]
    }

    pub fn omega_f(&self, path: &[u8]) -> f64 {
        self.spec.omega_of(self.sum(path))
    }

    /// Exact rational part r of Δ_A(path) = L·r at an internal node;
    /// zero-sum children are handled (ω(0) = 0).
    pub fn delta_r(&self, path: &[u8]) -> Result<Ratio<i128>> {
        let mut child1 = path.to_vec();
        child1.push(1);
        let mut child2 = path.to_vec();
        child2.push(2);
        Ok(self.spec.omega_ratio(self.sum(path))?
            - self.spec.omega_ratio(self.sums[&child1])?
            - self.spec.omega_ratio(self.sums[&child2])?)
    }

    pub fn delta_f(&self, path: &[u8]) -> Result<f64> {
        Ok(self.spec.l() * ratio_to_f64(&self.delta_r(path)?))
    }
}

// ─── exact iterated integrals ───

/// Exact time-ordered amplitude F_A^σ as an exponential polynomial.
/// Returns the zero polynomial when any internal subtree sum vanishes.
pub fn f_sigma_exact(spec: &TorusSpec, ot: &OrderedTree, leaf_k: &[i64]) -> Result<ExpPoly> {
    let data = TreeData::new(spec, &ot.tree, leaf_k)?;
    if ot.order.iter().any(|m| data.sum(m) == 0) {
        return Ok(ExpPoly::zero());
    }
    let mut acc = ExpPoly::one();
    for m in &ot.order {
        let phase = ExpPoly::phase(big_ratio(data.delta_r(m)?));
        acc = acc
            .mul(&phase)
            .scale(C64::new(data.omega_f(m), 0.0))
            .integrate_0_to_t(spec.l());
    }
    Ok(acc)
}

/// F_A = Σ_{σ} F_A^σ over all admissible orders.
pub fn f_tree_total(spec: &TorusSpec, tree: &Tree, leaf_k: &[i64]) -> Result<ExpPoly> {
    let mut acc = ExpPoly::zero();
    for order in admissible_orders(tree)? {
        let ot = OrderedTree { tree: tree.clone(), order };
        acc = acc.add(&f_sigma_exact(spec, &ot, leaf_k)?);
    }
    Ok(acc)
}

/// The same total amplitude by the structural recursion
/// F_{(A₁,A₂)}(t) = ∫₀ᵗ ω(ζ̄) e^{iΔτ} F_{A₁}(τ) F_{A₂}(τ) dτ, F_⊥ = 1.
pub fn f_tree_recursive(spec: &TorusSpec, tree: &Tree, leaf_k: &[i64]) -> Result<ExpPoly> {
    let data = TreeData::new(spec, tree, leaf_k)?;
    f_rec(spec, &data, tree, &mut Vec::new())
}

fn f_rec(
    spec: &TorusSpec,
    data: &TreeData,
    tree: &Tree,
    path: &mut NodePath,
) -> Result<ExpPoly> {
    let sub = tree.subtree(path)?;
    if sub.is_leaf() {
        return Ok(ExpPoly::one());
    }
    path.push(1);
    let f1 = f_rec(spec, data, tree, path)?;
    path.pop();
    path.push(2);
    let f2 = f_rec(spec, data, tree, path)?;
    path.pop();
    let phase = ExpPoly::phase(big_ratio(data.delta_r(path)?));
    Ok(f1
        .mul(&f2)
        .mul(&phase)
        .scale(C64::new(data.omega_f(path), 0.0))
        .integrate_0_to_t(spec.l()))
}

/// Oracle: the same simplex integral by nested adaptive quadrature.
/// Panics only if an inner adaptive pass fails to converge below `tol`.
pub fn f_sigma_quadrature(
    spec: &TorusSpec,
    ot: &OrderedTree,
    leaf_k: &[i64],
    t: f64,
    tol: f64,
) -> Result<C64> {
    let data = TreeData::new(spec, &ot.tree, leaf_k)?;
    let mut omegas = Vec::new();
    let mut thetas = Vec::new();
    for m in &ot.order {
        omegas.push(data.omega_f(m));
        thetas.push(data.delta_f(m)?);
    }
    Ok(nested_quadrature(&omegas, &thetas, omegas.len(), t, tol))
}

fn nested_quadrature(omegas: &[f64], thetas: &[f64], m: usize, tau: f64, tol: f64) -> C64 {
    if m == 0 {
        return C64::new(1.0, 0.0);
    }
    let w = omegas[m - 1];
    let th = thetas[m - 1];
    integrate_c64(
        &|s| {
            C64::new(0.0, th * s).exp() * w * nested_quadrature(omegas, thetas, m - 1, s, tol)
        },
        0.0,
        tau,
        tol,
    )
    .expect("nested simplex quadrature converges")
}

// ─── leading (secular) term ───

/// F̃_A^σ(t): Π_{j=1..n} [ω(σ(2j))ω(σ(2j−1)) / (iΔ(σ(2j−1)))] ·
/// δ(Δ(σ(2j−1)) + Δ(σ(2j))) · tⁿ/n!  for a tree with 2n internal nodes.
/// The pairing delta is an exact rational test, never a float comparison.
pub fn f_sigma_leading(
    spec: &TorusSpec,
    ot: &OrderedTree,
    leaf_k: &[i64],
    t: f64,
) -> Result<C64> {
    let n2 = ot.n_internal();
    if n2 % 2 != 0 {
        return Err(Error::config("leading term requires an even node count"));
    }
    let n = n2 / 2;
    let data = TreeData::new(spec, &ot.tree, leaf_k)?;
    // A vanished ω factor kills the amplitude before any division; once all
    // subtree sums are nonzero every Δ is nonzero as well (no first-order
    // resonances), so the divisions below are safe.
    if ot.order.iter().any(|m| data.sum(m) == 0) {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut coeff = C64::new(1.0, 0.0);
    for j in 1..=n {
        let lower = ot.sigma(2 * j - 1);
        let upper = ot.sigma(2 * j);
        if !(data.delta_r(lower)? + data.delta_r(upper)?).is_zero() {
            return Ok(C64::new(0.0, 0.0));
        }
        let i_delta = C64::new(0.0, data.delta_f(lower)?);
        coeff *= C64::new(data.omega_f(upper) * data.omega_f(lower), 0.0) / i_delta;
    }
    let mut factorial = 1.0;
    for j in 2..=n {
        factorial *= j as f64;
    }
    Ok(coeff * t.powi(n as i32) / factorial)
}

// ─── pairing decomposition ───

/// Split of a paired ordered tree at the root: the last-placed pair is
/// (σ(2n−1), root), σ(2n−1) sits directly under the root, and the remaining
/// order restricts to the three component subtrees with pairs intact.
pub struct Decomposition {
    /// A₁: the root child opposite σ(2n−1), with its induced order.
    pub comp1: OrderedTree,
    /// A₂, A₃: the two children of σ(2n−1), with their induced orders.
    pub comp2: OrderedTree,
    pub comp3: OrderedTree,
    /// 1 if σ(2n−1) is the left root child, 2 if it is the right one.
    pub side: u8,
}

pub fn decompose(ot: &OrderedTree) -> Result<Decomposition> {
    let n2 = ot.n_internal();
    if n2 < 2 || n2 % 2 != 0 || !ot.is_paired() {
        return Err(Error::config("decomposition requires a paired tree with ≥ 2 nodes"));
    }
    let root = ot.sigma(n2);
    let m_star = ot.sigma(n2 - 1).clone();
    if !root.is_empty() || m_star.len() != 1 {
        return Err(Error::config(
            "pairing decomposition invariant violated: σ(2n−1) is not a root child",
        ));
    }
    let side = m_star[0];
    let other = 3 - side;

    let comp1_tree = ot.tree.subtree(&[other])?.clone();
    let comp2_tree = ot.tree.subtree(&[side, 1])?.clone();
    let comp3_tree = ot.tree.subtree(&[side, 2])?.clone();

    // Partition the first 2n−2 order slots by component, stripping prefixes.
    let mut orders: [Vec<NodePath>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut positions: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (pos, m) in ot.order[..n2 - 2].iter().enumerate() {
        let (slot, stripped) = if m[0] == other {
            (0usize, m[1..].to_vec())
        } else if m.len() >= 2 && m[0] == side {
            (if m[1] == 1 { 1 } else { 2 }, m[2..].to_vec())
        } else {
            return Err(Error::config("order entry outside the three components"));
        };
        orders[slot].push(stripped);
        positions[slot].push(pos + 1); // 1-based original position
    }
    // Pairs must lie inside single components and the induced position maps
    // must respect parity: each component's original positions come as
    // consecutive (odd, even) pairs.
    for plist in &positions {
        if plist.len() % 2 != 0 {
            return Err(Error::config("a pairing straddles two components"));
        }
        for j in 0..plist.len() / 2 {
            let a = plist[2 * j];
            let b = plist[2 * j + 1];
            if a % 2 != 1 || b != a + 1 {
                return Err(Error::config("induced order map does not respect parity"));
            }
        }
    }

    let [o1, o2, o3] = orders;
    Ok(Decomposition {
        comp1: OrderedTree { tree: comp1_tree, order: o1 },
        comp2: OrderedTree { tree: comp2_tree, order: o2 },
        comp3: OrderedTree { tree: comp3_tree, order: o3 },
        side,
    })
}

// ─── paired-tree fields ───

/// Trilinear interaction kernel on stored amplitudes:
///   K(u,v,w)(k) = Σ_{k₁+k₂+k₃=k} [ω(ξ)ω(ξ₂+ξ₃)/Δ^ξ_{ξ₁,ξ₂+ξ₃}] ·
///                  δ(Δ^ξ_{ξ₁,ξ₂+ξ₃} + Δ^{ξ₂+ξ₃}_{ξ₂,ξ₃}) · u(k₁)v(k₂)w(k₃)
/// with the delta decided exactly (the pair sum telescopes to the order-2
/// resonance function in (k, k₁, k₂, k₃)).
pub fn k_trilinear(
    spec: &TorusSpec,
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
) -> Result<SpectralField> {
    let modes: Vec<i64> = spec.modes().collect();
    let mut out = SpectralField::zero(spec);
    for &k1 in &modes {
        let u1 = u.get(k1);
        if u1.norm_sqr() == 0.0 {
            continue;
        }
        for &k2 in &modes {
            let v2 = v.get(k2);
            if v2.norm_sqr() == 0.0 {
                continue;
            }
            for &k3 in &modes {
                let k23 = k2 + k3;
                if k23 == 0 {
                    continue; // ω(0) = 0 kills the term
                }
                let k = k1 + k23;
                if k == 0 || !spec.contains(k) {
                    continue;
                }
                if crate::resonance::delta4_numerator(spec, k, k1, k2, k3)? != 0 {
                    continue;
                }
                let w3 = w.get(k3);
                let xi = spec.xi(k);
                let xi1 = spec.xi(k1);
                let xi23 = spec.xi(k23);
                let kernel = omega(xi) * omega(xi23) / delta3(xi, xi1, xi23)?;
                out.add_at(k, u1 * v2 * w3 * kernel)?;
            }
        }
    }
    Ok(out)
}

/// Paired-tree field G_A^σ(a) by the structural recursion
/// G = i·K(G₁, G₂, G₃) over the root decomposition; G_⊥ = a.
pub fn g_sigma(spec: &TorusSpec, a: &SpectralField, ot: &OrderedTree) -> Result<SpectralField> {
    if ot.n_internal() == 0 {
        return Ok(a.clone());
    }
    let d = decompose(ot)?;
    let g1 = g_sigma(spec, a, &d.comp1)?;
    let g2 = g_sigma(spec, a, &d.comp2)?;
    let g3 = g_sigma(spec, a, &d.comp3)?;
    Ok(k_trilinear(spec, &g1, &g2, &g3)?.scale(C64::new(0.0, 1.0)))
}

/// Direct summation route for G: enumerate all window leaf assignments and
/// apply the per-pair factors with the exact pairing delta. Exponential in
/// the node count — guarded to n ≤ 2 pairs; the recursion is the fast path.
pub fn g_sigma_direct(
    spec: &TorusSpec,
    a: &SpectralField,
    ot: &OrderedTree,
) -> Result<SpectralField> {
    let n2 = ot.n_internal();
    if n2 == 0 {
        return Ok(a.clone());
    }
    if n2 % 2 != 0 || !ot.is_paired() {
        return Err(Error::config("direct G requires a paired ordered tree"));
    }
    let n = n2 / 2;
    if n > 2 {
        return Err(Error::config("direct G summation is guarded to ≤ 2 pairs"));
    }
    let modes: Vec<i64> = spec.modes().collect();
    let leaves = ot.tree.leaves();
    let mut out = SpectralField::zero(spec);
    let mut assignment = vec![0i64; leaves.len()];
    direct_sum_rec(spec, a, ot, &modes, &leaves, &mut assignment, 0, &mut out)?;
    // Global i^n prefactor.
    let i_pow = match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    Ok(out.scale(i_pow))
}

#[allow(clippy::too_many_arguments)]
fn direct_sum_rec(
    spec: &TorusSpec,
    a: &SpectralField,
    ot: &OrderedTree,
    modes: &[i64],
    leaves: &[NodePath],
    assignment: &mut Vec<i64>,
    depth: usize,
    out: &mut SpectralField,
) -> Result<()> {
    if depth < leaves.len() {
        for &k in modes {
            assignment[depth] = k;
            direct_sum_rec(spec, a, ot, modes, leaves, assignment, depth + 1, out)?;
        }
        return Ok(());
    }
    let data = TreeData::new(spec, &ot.tree, assignment)?;
    let total = data.sum(&[]);
    if total == 0 || !spec.contains(total) {
        return Ok(());
    }
    if ot.order.iter().any(|m| data.sum(m) == 0) {
        return Ok(());
    }
    let n = ot.n_internal() / 2;
    let mut coeff = C64::new(1.0, 0.0);
    for j in 1..=n {
        let lower = ot.sigma(2 * j - 1);
        let upper = ot.sigma(2 * j);
        if !(data.delta_r(lower)? + data.delta_r(upper)?).is_zero() {
            return Ok(());
        }
        coeff *= (data.omega_f(upper) * data.omega_f(lower)) / data.delta_f(upper)?;
    }
    let mut product = coeff;
    for &k in assignment.iter() {
        product *= a.get(k);
    }
    out.add_at(total, product)?;
    Ok(())
}

// ─── scalar profiles U ───

/// U_A^σ(a, ·) over the whole window, via the pairing-collapsed recursion:
/// on a certified window the only vanishing pair sums are the trivial
/// pairings (ξ₁,ξ₂,ξ₃) = (η, ξ, −η) and (η, −η, ξ), so
///   U(ξ) = Σ_{η≠ξ} F(η,ξ)|a(η)|² · [U₁(η)U₂(ξ)U₃(−η) + U₁(η)U₂(−η)U₃(ξ)],
/// the η = −ξ term counted once, with F(η,ξ) = ω(ξ)ω(ξ−η)/Δ^ξ_{η,ξ−η}.
pub fn u_vector(spec: &TorusSpec, a: &SpectralField, ot: &OrderedTree) -> Result<Vec<f64>> {
    let modes: Vec<i64> = spec.modes().collect();
    if ot.n_internal() == 0 {
        return Ok(vec![1.0; modes.len()]);
    }
    let d = decompose(ot)?;
    let u1 = u_vector(spec, a, &d.comp1)?;
    let u2 = u_vector(spec, a, &d.comp2)?;
    let u3 = u_vector(spec, a, &d.comp3)?;
    let at = |v: &[f64], k: i64| v[mode_index(&modes, k)];

    let mut out = vec![0.0; modes.len()];
    for (i, &k) in modes.iter().enumerate() {
        let xi = spec.xi(k);
        let mut acc = 0.0;
        for &h in &modes {
            if h == k {
                continue; // ω(ξ−η) = ω(0) = 0
            }
            let weight = a.get(h).norm_sqr();
            if weight == 0.0 {
                continue;
            }
            let eta = spec.xi(h);
            let f = omega(xi) * omega(xi - eta) / delta3(xi, eta, xi - eta)?;
            let bracket = if h == -k {
                at(&u1, -k) * at(&u2, k) * at(&u3, k)
            } else {
                at(&u1, h) * (at(&u2, k) * at(&u3, -h) + at(&u2, -h) * at(&u3, k))
            };
            acc += f * weight * bracket;
        }
        out[i] = acc;
    }
    Ok(out)
}

fn mode_index(modes: &[i64], k: i64) -> usize {
    modes
        .binary_search(&k)
        .expect("mode inside the symmetric window")
}

/// Scalar profile U_A^σ(a, ξ).
pub fn u_sigma(
    spec: &TorusSpec,
    a: &SpectralField,
    ot: &OrderedTree,
    xi: Wavenumber,
) -> Result<f64> {
    let modes: Vec<i64> = spec.modes().collect();
    if !spec.contains(xi.k()) {
        return Err(Error::config(format!("mode {} outside window", xi.k())));
    }
    Ok(u_vector(spec, a, ot)?[mode_index(&modes, xi.k())])
}

// ─── identity checks ───

/// Σ_{(A,σ) paired, n pairs} U_A^σ(a,ξ) against the closed power form.
///
/// The sum collapses to (−R(a,ξ))ⁿ with R the window-exact collapsed rate
/// ([`crate::phase::interaction_rate`]): by parity U₁(−η) = −U₁(η), the
/// multinomial recursion telescopes (V(η) + V(−η) + V(ξ))ⁿ = V(ξ)ⁿ, so the
/// identity holds exactly on the finite window — including the η = ±ξ
/// boundary terms that the symmetrized rate drops.
pub fn comb_identity_check(
    spec: &TorusSpec,
    a: &SpectralField,
    n_pairs: usize,
    xi: Wavenumber,
) -> Result<(f64, f64)> {
    if n_pairs > 3 {
        return Err(Error::config("comb identity check is guarded to n ≤ 3 pairs"));
    }
    let modes: Vec<i64> = spec.modes().collect();
    let idx = mode_index(&modes, xi.k());
    let mut lhs = 0.0;
    for ot in crate::trees::paired_trees(n_pairs)? {
        lhs += u_vector(spec, a, &ot)?[idx];
    }
    let rhs = (-crate::phase::interaction_rate(spec, a, xi)?).powi(n_pairs as i32);
    Ok((lhs, rhs))
}

/// Sum of leading terms F̃_A^σ over all admissible-but-unpaired (A,σ) with
/// the given pair count; vanishes identically by the transposition argument.
pub fn first_cancellation_check(
    spec: &TorusSpec,
    n_pairs: usize,
    leaf_k: &[i64],
    t: f64,
) -> Result<C64> {
    if n_pairs > 2 {
        return Err(Error::config("cancellation check is guarded to n ≤ 2 pairs"));
    }
    let mut acc = C64::new(0.0, 0.0);
    for tree in enumerate_trees(2 * n_pairs)? {
        for order in admissible_orders(&tree)? {
            let ot = OrderedTree { tree: tree.clone(), order };
            if ot.is_paired() {
                continue;
            }
            acc += f_sigma_leading(spec, &ot, leaf_k, t)?;
        }
    }
    Ok(acc)
}

// ─── tests ───

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;
    use crate::sampling::sample_initial_datum;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn l1_spec() -> TorusSpec {
        TorusSpec::new(1.0, 8).unwrap()
    }

    fn l2_spec(k: i64) -> TorusSpec {
        TorusSpec::from_l2(2, 1, k).unwrap()
    }

    fn cherry_right() -> Tree {
        // (⊥,(⊥,⊥))
        Tree::node(Tree::Leaf, Tree::node(Tree::Leaf, Tree::Leaf))
    }

    fn unique_ot(tree: Tree) -> OrderedTree {
        let order = admissible_orders(&tree).unwrap().remove(0);
        OrderedTree { tree, order }
    }

    #[test]
    fn single_node_amplitude_closed_form() {
        // F(t) = ω(2)(e^{−0.6it} − 1)/(−0.6i) at L = 1, ξ⃗ = (1,1).
        let spec = l1_spec();
        let ot = unique_ot(Tree::node(Tree::Leaf, Tree::Leaf));
        let f = f_sigma_exact(&spec, &ot, &[1, 1]).unwrap();
        for &t in &[0.0, 0.8, 2.5, 7.0] {
            let exact = omega(2.0) * (C64::new(0.0, -0.6 * t).exp() - 1.0)
                / C64::new(0.0, -0.6);
            assert_abs_diff_eq!((f.eval(1.0, t) - exact).norm(), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(f.eval(1.0, 0.0).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_subtree_sum_gives_zero_amplitude() {
        let spec = l1_spec();
        let ot = unique_ot(Tree::node(Tree::Leaf, Tree::Leaf));
        let f = f_sigma_exact(&spec, &ot, &[3, -3]).unwrap();
        assert!(f.is_empty());
    }

    #[test]
    fn order_sum_matches_structural_recursion_on_all_three_node_trees() {
        let spec = l2_spec(8);
        let mut rng = crate::sampling::chacha_from(02_2024);
        for tree in enumerate_trees(3).unwrap() {
            for _ in 0..4 {
                let leaf_k: Vec<i64> = (0..tree.leaf_count())
                    .map(|_| loop {
                        let k = rng.random_range(-6..=6i64);
                        if k != 0 {
                            break k;
                        }
                    })
                    .collect();
                let total = f_tree_total(&spec, &tree, &leaf_k).unwrap();
                let rec = f_tree_recursive(&spec, &tree, &leaf_k).unwrap();
                let gap = total.max_abs_diff_on(&rec, spec.l(), &[0.4, 1.3, 2.9, 6.1]);
                assert!(gap <= 1e-10, "tree {tree} ξ⃗ {leaf_k:?}: gap {gap:.2e}");
            }
        }
    }

    #[test]
    fn leaf_total_amplitude_is_one() {
        let spec = l1_spec();
        let f = f_tree_total(&spec, &Tree::Leaf, &[5]).unwrap();
        assert_eq!(f.eval(1.0, 3.3), C64::new(1.0, 0.0));
    }

    #[test]
    fn exact_amplitude_matches_simplex_quadrature() {
        // Small version of the acceptance sweep: every (A,σ) with ≤ 3 nodes,
        // a few random frequency vectors each, tolerance 1e−9.
        let spec = l2_spec(8);
        let mut rng = crate::sampling::chacha_from(7_031);
        let t = 1.7;
        for n in 0..=3usize {
            for tree in enumerate_trees(n).unwrap() {
                for order in admissible_orders(&tree).unwrap() {
                    let ot = OrderedTree { tree: tree.clone(), order };
                    for _ in 0..3 {
                        let leaf_k: Vec<i64> = (0..tree.leaf_count())
                            .map(|_| loop {
                                let k = rng.random_range(-5..=5i64);
                                if k != 0 {
                                    break k;
                                }
                            })
                            .collect();
                        let exact = f_sigma_exact(&spec, &ot, &leaf_k).unwrap();
                        let oracle =
                            f_sigma_quadrature(&spec, &ot, &leaf_k, t, 1e-12).unwrap();
                        let gap = (exact.eval(spec.l(), t) - oracle).norm();
                        assert!(gap <= 1e-9, "tree {tree}, ξ⃗ {leaf_k:?}: {gap:.2e}");
                    }
                }
            }
        }
    }

    #[test]
    fn leading_term_building_block_frozen() {
        // (⊥,(⊥,⊥)) with leaves (η,−η,ξ) = (1,−1,2) at L = 1:
        // F̃(t) = ω(ξ)ω(ξ−η)/(iΔ^{ξ−η}_{−η,ξ})·t = −i·t/3.
        let spec = l1_spec();
        let ot = unique_ot(cherry_right());
        for &t in &[0.5, 2.0] {
            let v = f_sigma_leading(&spec, &ot, &[1, -1, 2], t).unwrap();
            assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, -t / 3.0, epsilon = 1e-15);
        }
        // The same value must equal i·F(η,ξ)·t with F(η,ξ) = ω(ξ)ω(ξ−η)/Δ^ξ_{η,ξ−η}.
        let f_building_block = omega(2.0) * omega(1.0) / delta3(2.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(f_building_block, -1.0 / 3.0, epsilon = 1e-15);
        let v = f_sigma_leading(&spec, &ot, &[1, -1, 2], 1.0).unwrap();
        assert_abs_diff_eq!(
            (v - C64::new(0.0, 1.0) * f_building_block).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn leading_term_vanishes_off_pairing() {
        let spec = l1_spec();
        let ot = unique_ot(cherry_right());
        let v = f_sigma_leading(&spec, &ot, &[1, 2, 3], 1.0).unwrap();
        assert_eq!(v, C64::new(0.0, 0.0));
    }

    #[test]
    fn secular_structure_matches_leading_term() {
        // For paired diagrams the exact amplitude has exactly one secular
        // term of top power n whose coefficient is exactly the leading term,
        // and every oscillating term has power ≤ n−1, so the rescaled gap
        // (F − F̃)/t^{n−1} stays bounded as t grows.
        let spec = l1_spec();
        let leaf_n1 = vec![1i64, -1, 2];
        let leaf_n2 = vec![1i64, 2, -1, 3, -3];
        let mut cases: Vec<(OrderedTree, Vec<i64>)> =
            vec![(unique_ot(cherry_right()), leaf_n1)];
        for ot in crate::trees::paired_trees(2).unwrap() {
            cases.push((ot, leaf_n2.clone()));
        }
        let mut nonzero_leads = 0;
        for (ot, leaf_k) in cases {
            let n = ot.n_internal() / 2;
            let f = f_sigma_exact(&spec, &ot, &leaf_k).unwrap();
            let lead = f_sigma_leading(&spec, &ot, &leaf_k, 1.0).unwrap();
            let scale = f.max_abs_coeff().max(1.0);
            // Top secular coefficient equals the leading term at t = 1.
            let top = f.coeff(&num_rational::BigRational::zero(), n as u32);
            assert!((top - lead).norm() <= 1e-12 * scale, "top {top:?} vs F̃ {lead:?}");
            // No oscillating term may reach power n.
            let max_osc = f
                .terms()
                .filter(|((r, _), c)| !r.is_zero() && c.norm() > 1e-12 * scale)
                .map(|((_, p), _)| *p)
                .max()
                .unwrap_or(0);
            assert!(max_osc < n as u32 || f.is_empty(), "oscillating power {max_osc}");
            if lead.norm() > 1e-9 {
                nonzero_leads += 1;
                assert_eq!(f.max_secular_power(1e-12 * scale), Some(n as u32));
                // The gap F − F̃ only carries powers ≤ n−1, so rescaling by
                // t^{n−1} leaves a bounded oscillation: late samples must stay
                // within an order of magnitude of early ones (a leftover t^n
                // term would grow them by ~100×).
                let g = |t: f64| {
                    let lt = f_sigma_leading(&spec, &ot, &leaf_k, t).unwrap();
                    (f.eval(spec.l(), t) - lt).norm() / t.powi(n as i32 - 1)
                };
                let early = g(1.0).max(g(3.0)).max(g(10.0)).max(g(30.0));
                assert!(g(1000.0) <= 10.0 * early + 1e-9, "rescaled gap grew");
            }
        }
        assert!(nonzero_leads >= 2, "need nontrivial leading terms for the check");
    }

    #[test]
    fn cancellation_of_unpaired_diagrams() {
        let spec = l2_spec(8);
        let t = 1.9;
        // One pair: every admissible order is paired, so the sum is empty.
        let v1 = first_cancellation_check(&spec, 1, &[1, 2, -1], t).unwrap();
        assert_eq!(v1, C64::new(0.0, 0.0));
        // Two pairs: engineered frequencies make individual F̃ ≠ 0 while the
        // total cancels pairwise.
        let leaf_k = [1i64, 2, -1, 3, -3];
        let mut any_nonzero = false;
        for tree in enumerate_trees(4).unwrap() {
            for order in admissible_orders(&tree).unwrap() {
                let ot = OrderedTree { tree: tree.clone(), order };
                if ot.is_paired() {
                    continue;
                }
                if f_sigma_leading(&spec, &ot, &leaf_k, t).unwrap().norm() > 1e-6 {
                    any_nonzero = true;
                }
            }
        }
        assert!(any_nonzero, "engineered frequencies never fire a delta");
        let v2 = first_cancellation_check(&spec, 2, &leaf_k, t).unwrap();
        assert!(v2.norm() <= 1e-12, "unpaired sum {v2:?}");
    }

    #[test]
    fn transposed_orders_contribute_opposite_leading_terms() {
        let spec = l2_spec(8);
        let leaf_k = [1i64, 2, -1, 3, -3];
        let t = 1.3;
        let mut checked = 0;
        for tree in enumerate_trees(4).unwrap() {
            for order in admissible_orders(&tree).unwrap() {
                let ot = OrderedTree { tree: tree.clone(), order: order.clone() };
                if ot.is_paired() {
                    continue;
                }
                // First violated pairing position.
                let j = (0..2)
                    .find(|&j| {
                        !crate::trees::le_parenthood(&order[2 * j], &order[2 * j + 1])
                    })
                    .expect("unpaired order has a violation");
                let mut swapped = order.clone();
                swapped.swap(2 * j, 2 * j + 1);
                let ot_swapped =
                    OrderedTree::new(tree.clone(), swapped).expect("swap stays admissible");
                let a = f_sigma_leading(&spec, &ot, &leaf_k, t).unwrap();
                let b = f_sigma_leading(&spec, &ot_swapped, &leaf_k, t).unwrap();
                assert!((a + b).norm() <= 1e-13, "pair not opposite: {a:?} vs {b:?}");
                checked += 1;
            }
        }
        assert!(checked >= 12);
    }

    // ─── paired-tree fields ───

    fn random_datum(spec: &TorusSpec, seed: u64) -> SpectralField {
        sample_initial_datum(spec, &Profile::inverse_bracket(), seed)
    }

    #[test]
    fn trivial_ordered_tree_returns_the_field() {
        let spec = l2_spec(6);
        let a = random_datum(&spec, 11);
        let ot = OrderedTree { tree: Tree::Leaf, order: vec![] };
        let g = g_sigma(&spec, &a, &ot).unwrap();
        assert_eq!(g.max_abs_diff(&a).unwrap(), 0.0);
    }

    #[test]
    fn one_pair_field_matches_hand_collapse() {
        // For a single pair the recursion must reduce to
        // G(k) = i·Σ'_η F(η,ξ)|a(η)|²·(2 − [η = −ξ])·a(k).
        let spec = l2_spec(6);
        let a = random_datum(&spec, 23);
        let modes: Vec<i64> = spec.modes().collect();
        for ot in crate::trees::paired_trees(1).unwrap() {
            let g = g_sigma(&spec, &a, &ot).unwrap();
            for &k in &modes {
                let xi = spec.xi(k);
                let mut acc = 0.0;
                for &h in &modes {
                    if h == k {
                        continue;
                    }
                    let eta = spec.xi(h);
                    let f = omega(xi) * omega(xi - eta) / delta3(xi, eta, xi - eta).unwrap();
                    let mult = if h == -k { 1.0 } else { 2.0 };
                    acc += f * a.get(h).norm_sqr() * mult;
                }
                let expect = C64::new(0.0, 1.0) * acc * a.get(k);
                assert_abs_diff_eq!((g.get(k) - expect).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn recursion_and_direct_summation_agree() {
        let spec = l2_spec(5);
        let a = random_datum(&spec, 37);
        for n in 1..=2usize {
            for ot in crate::trees::paired_trees(n).unwrap() {
                let fast = g_sigma(&spec, &a, &ot).unwrap();
                let direct = g_sigma_direct(&spec, &a, &ot).unwrap();
                let gap = fast.max_abs_diff(&direct).unwrap();
                assert!(gap <= 1e-10, "n = {n}: direct/recursion gap {gap:.2e}");
            }
        }
    }

    #[test]
    fn paired_fields_are_real_valued() {
        let spec = l2_spec(6);
        let a = random_datum(&spec, 5);
        for ot in crate::trees::paired_trees(2).unwrap().into_iter().step_by(3) {
            let g = g_sigma(&spec, &a, &ot).unwrap();
            assert!(g.is_real_symmetric(1e-12));
            let samples = g.physical_samples(64);
            let max_im = samples.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            assert!(max_im <= 1e-12);
        }
    }

    #[test]
    fn u_profile_consistency_with_g() {
        // Ĝ(ξ) = iⁿ U(ξ) â(ξ), U real, with parity U(−ξ) = (−1)ⁿU(ξ).
        let spec = l2_spec(6);
        let a = random_datum(&spec, 41);
        for n in 1..=2usize {
            let i_pow = C64::new(0.0, 1.0).powu(n as u32);
            for ot in crate::trees::paired_trees(n).unwrap() {
                let u = u_vector(&spec, &a, &ot).unwrap();
                let g = g_sigma(&spec, &a, &ot).unwrap();
                let modes: Vec<i64> = spec.modes().collect();
                for (i, &k) in modes.iter().enumerate() {
                    let expect = i_pow * u[i] * a.get(k);
                    assert!((g.get(k) - expect).norm() <= 1e-10, "mode {k}");
                    // parity
                    let j = mode_index(&modes, -k);
                    let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
                    assert_abs_diff_eq!(u[i], parity * u[j], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn trivial_u_is_one() {
        let spec = l2_spec(6);
        let a = random_datum(&spec, 2);
        let ot = OrderedTree { tree: Tree::Leaf, order: vec![] };
        let u = u_sigma(&spec, &a, &ot, Wavenumber::new(3).unwrap()).unwrap();
        assert_eq!(u, 1.0);
    }

    #[test]
    fn comb_identity_small_orders() {
        let spec = l2_spec(8);
        let a = random_datum(&spec, 99);
        let xi = Wavenumber::new(2).unwrap();
        let (l0, r0) = comb_identity_check(&spec, &a, 0, xi).unwrap();
        assert_eq!((l0, r0), (1.0, 1.0));
        for n in 1..=2usize {
            let (lhs, rhs) = comb_identity_check(&spec, &a, n, xi).unwrap();
            let tol = 1e-9 * rhs.abs().max(1.0);
            assert!((lhs - rhs).abs() <= tol, "n = {n}: {lhs} vs {rhs}");
        }
    }
}
