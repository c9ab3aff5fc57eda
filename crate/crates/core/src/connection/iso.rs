use super::chi::ChiDerivation;
use super::geodesic::geodesic_jet;
use super::{BundleConnection, SymbolTables, TorsionFreeConnection};
use crate::error::{Error, Result};
use crate::graded::{series_invert, AlgebraMap, Generator, SuperPoly};
use crate::jet::JetElement;

/// Square matrices of even polynomials on one table.
type Matrix = Vec<Vec<SuperPoly>>;

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let r = a.len();
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let mut acc = SuperPoly::zero(a[i][0].table());
                    for (l, b_l) in b.iter().enumerate() {
                        if !a[i][l].is_zero() && !b_l[j].is_zero() {
                            acc = &acc + &(&a[i][l] * &b_l[j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Inverse of `M = 1 + N` with `N` nilpotent of order at most `k + 1`.
fn unipotent_inverse(m: &Matrix, k: u32) -> Matrix {
    let r = m.len();
    if r == 0 {
        return vec![];
    }
    let t = m[0][0].table();
    let id: Matrix = (0..r)
        .map(|i| (0..r).map(|j| if i == j { SuperPoly::one(t) } else { SuperPoly::zero(t) }).collect())
        .collect();
    let minus_n: Matrix = (0..r)
        .map(|i| (0..r).map(|j| &id[i][j] - &m[i][j]).collect())
        .collect();
    let mut acc = id.clone();
    let mut power = id;
    for _ in 0..k {
        power = mat_mul(&power, &minus_n);
        for i in 0..r {
            for j in 0..r {
                acc[i][j] = &acc[i][j] + &power[i][j];
            }
        }
    }
    acc
}

/// The isomorphism `Phi: J^k(A) -> S^(k)(T*M) (x) A` fixed by a torsion-free
/// connection and a bundle connection, with `Phi(j^k(h)) = exp(chi)(h)`.
///
/// On generators: `x -> x`, `dx^i -> delta x^i(x, xi)` and
/// `v^a -> M^a_b(x, xi) v^b` where `exp(chi)(v^a) = M^a_b v^b`.
#[derive(Debug, Clone)]
pub struct JetIsomorphism {
    chi: ChiDerivation,
    forward: AlgebraMap,
    inverse: AlgebraMap,
    normal: Vec<SuperPoly>,
    normal_inverse: Vec<SuperPoly>,
    frame: Matrix,
    frame_inverse: Matrix,
}

impl JetIsomorphism {
    pub fn new(tm: &TorsionFreeConnection, bundle: Option<&BundleConnection>, k: u32) -> Result<Self> {
        let chi = ChiDerivation::new(tm, bundle, k)?;
        let chart = tm.chart().clone();
        let SymbolTables { jet, symbol, .. } = chi.tables().clone();
        let n = chart.dim();

        let delta: Vec<SuperPoly> = geodesic_jet(tm, k)?
            .iter()
            .map(|d| d.reinterpret(&symbol))
            .collect::<Result<_>>()?;

        let fibers: Vec<String> = bundle.map(|b| b.fiber_names().to_vec()).unwrap_or_default();
        let fiber_gens: Vec<Generator> = fibers.iter().map(|f| symbol.resolve(f)).collect::<Result<_>>()?;
        let frame: Matrix = fiber_gens
            .iter()
            .map(|&g| {
                let e = chi.exp(&SuperPoly::from_generator(&symbol, g))?;
                Ok(fiber_gens.iter().map(|&h| e.derive_by(h)).collect())
            })
            .collect::<Result<_>>()?;
        let frame_inverse = unipotent_inverse(&frame, k);

        let combine = |m: &Matrix, alpha: usize, table: &std::sync::Arc<_>, entry: &dyn Fn(&SuperPoly) -> Result<SuperPoly>| {
            let mut acc = SuperPoly::zero(table);
            for (beta, name) in fibers.iter().enumerate() {
                if !m[alpha][beta].is_zero() {
                    acc = &acc + &(&entry(&m[alpha][beta])? * &SuperPoly::generator(table, name)?);
                }
            }
            Ok::<_, Error>(acc)
        };

        let jet_names = chart.jet_names();
        let mut assign: Vec<(&str, SuperPoly)> = jet_names.iter().map(String::as_str).zip(delta.iter().cloned()).collect();
        let fiber_images: Vec<SuperPoly> = (0..fibers.len())
            .map(|a| combine(&frame, a, &symbol, &|p| Ok(p.clone())))
            .collect::<Result<_>>()?;
        assign.extend(fibers.iter().map(String::as_str).zip(fiber_images));
        let forward = AlgebraMap::new(&jet, &symbol, assign)?;

        // xi = w(x, delta x) inverts delta x = delta x(x, xi); in J it reads w(x, dx).
        let w = series_invert(&delta)?;
        let rename = AlgebraMap::new(
            &symbol,
            &jet,
            chart
                .tangent_names()
                .iter()
                .map(String::as_str)
                .zip((0..n).map(|i| SuperPoly::from_generator(&jet, Generator::Formal(i))))
                .collect::<Vec<_>>(),
        )?;
        let w_jet: Vec<SuperPoly> = w.iter().map(|p| rename.apply(p)).collect::<Result<_>>()?;
        let tangent = chart.tangent_names();
        let at_w = AlgebraMap::new(&symbol, &jet, tangent.iter().map(String::as_str).zip(w_jet.iter().cloned()))?;
        let mut assign: Vec<(&str, SuperPoly)> = tangent.iter().map(String::as_str).zip(w_jet).collect();
        let fiber_images: Vec<SuperPoly> = (0..fibers.len())
            .map(|a| combine(&frame_inverse, a, &jet, &|p| at_w.apply(p)))
            .collect::<Result<_>>()?;
        assign.extend(fibers.iter().map(String::as_str).zip(fiber_images));
        let inverse = AlgebraMap::new(&symbol, &jet, assign)?;

        Ok(JetIsomorphism {
            chi,
            forward,
            inverse,
            normal: delta,
            normal_inverse: w,
            frame,
            frame_inverse,
        })
    }

    pub fn chi(&self) -> &ChiDerivation {
        &self.chi
    }

    pub fn order(&self) -> u32 {
        self.chi.order()
    }

    pub fn tables(&self) -> &SymbolTables {
        self.chi.tables()
    }

    /// `J^k(A) -> S^(k)(T*M) (x) A`.
    pub fn forward(&self) -> &AlgebraMap {
        &self.forward
    }

    /// `S^(k)(T*M) (x) A -> J^k(A)`.
    pub fn inverse(&self) -> &AlgebraMap {
        &self.inverse
    }

    /// `delta x(x, xi)` on the symbol table.
    pub fn normal(&self) -> &[SuperPoly] {
        &self.normal
    }

    /// `w(x, xi)` with `delta x(x, w(x, xi)) = xi`, on the symbol table.
    pub fn normal_inverse(&self) -> &[SuperPoly] {
        &self.normal_inverse
    }

    /// `M^a_b(x, xi)` with `exp(chi)(v^a) = M^a_b v^b`.
    pub fn frame(&self) -> &[Vec<SuperPoly>] {
        &self.frame
    }

    pub fn frame_inverse(&self) -> &[Vec<SuperPoly>] {
        &self.frame_inverse
    }

    pub fn phi(&self, j: &JetElement) -> Result<SuperPoly> {
        self.check_order(j)?;
        self.forward.apply(&j.value().reinterpret(&self.tables().jet)?)
    }

    pub fn phi_inverse(&self, p: &SuperPoly) -> Result<JetElement> {
        let v = self.inverse.apply(&p.reinterpret(&self.tables().symbol)?)?;
        JetElement::new(self.chi.chart(), v)
    }

    fn check_order(&self, j: &JetElement) -> Result<()> {
        if j.order() != self.order() {
            return Err(Error::OrderMismatch(j.order(), self.order()));
        }
        if !j.chart().same_coords(self.chi.chart()) {
            return Err(Error::ChartMismatch(format!(
                "jet on `{}`, connection on `{}`",
                j.chart().name(),
                self.chi.chart().name()
            )));
        }
        Ok(())
    }
}

/// The automorphism `Psi = Phi_1 o Phi_0^{-1}` of `S^(k)(T*M) (x) A`, so that
/// `Phi_1 = Psi o Phi_0`.
pub fn psi_automorphism(
    g0: &TorsionFreeConnection,
    g1: &TorsionFreeConnection,
    b0: Option<&BundleConnection>,
    b1: Option<&BundleConnection>,
    k: u32,
) -> Result<AlgebraMap> {
    if !g0.chart().same_coords(g1.chart()) {
        return Err(Error::ChartMismatch("connections on different charts".into()));
    }
    let fibers = |b: Option<&BundleConnection>| b.map(|b| (b.fiber_names().to_vec(), b.fiber_degrees().to_vec()));
    if fibers(b0) != fibers(b1) {
        return Err(Error::ChartMismatch("bundle connections on different bundles".into()));
    }
    let phi0 = JetIsomorphism::new(g0, b0, k)?;
    let phi1 = JetIsomorphism::new(g1, b1, k)?;
    phi1.forward().after(phi0.inverse())
}
