use std::f64::consts::PI;
use std::sync::Arc;

/// A continuous test function `[S, T] -> R^r` with a known Lipschitz
/// constant and sup norm, so its continuity modulus is
/// `θ_g(s) = min(L s, 2 ||g||)`.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub lipschitz: f64,
    pub sup_norm: f64,
    f: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction").field("name", &self.name).finish()
    }
}

impl TestFunction {
    pub fn new(
        name: impl Into<String>,
        lipschitz: f64,
        sup_norm: f64,
        f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        TestFunction {
            name: name.into(),
            lipschitz,
            sup_norm,
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        (self.f)(t)
    }

    pub fn modulus(&self, s: f64) -> f64 {
        (self.lipschitz * s).min(2.0 * self.sup_norm)
    }
}

/// Scalar building blocks on `[s, e]`: constant one, the identity `t`,
/// `sin`/`cos` of `2πkτ` for `k = 1..=4` with `τ = (t - s)/(e - s)`, and
/// unit hats of half-width `(e - s)/2^hat_level` at each dyadic node of
/// that level.
fn scalar_catalog(span: (f64, f64), hat_level: u32) -> Vec<(String, f64, f64, Arc<dyn Fn(f64) -> f64 + Send + Sync>)> {
    let (s, e) = span;
    let len = e - s;
    let mut out: Vec<(String, f64, f64, Arc<dyn Fn(f64) -> f64 + Send + Sync>)> = vec![
        ("one".into(), 0.0, 1.0, Arc::new(|_| 1.0)),
        ("t".into(), 1.0, s.abs().max(e.abs()), Arc::new(|t| t)),
    ];
    for k in 1..=4 {
        let w = 2.0 * PI * k as f64 / len;
        out.push((format!("sin{k}"), w, 1.0, Arc::new(move |t| (w * (t - s)).sin())));
        out.push((format!("cos{k}"), w, 1.0, Arc::new(move |t| (w * (t - s)).cos())));
    }
    let n = 1usize << hat_level;
    let h = len / n as f64;
    for i in 0..=n {
        let c = s + len * i as f64 / n as f64;
        out.push((
            format!("hat{i}/{n}"),
            1.0 / h,
            1.0,
            Arc::new(move |t| (1.0 - (t - c).abs() / h).max(0.0)),
        ));
    }
    out
}

/// The scalar catalog paired with each basis vector of `R^r`.
pub fn test_catalog(span: (f64, f64), r: usize) -> Vec<TestFunction> {
    let mut out = Vec::new();
    for (name, lip, sup, f) in scalar_catalog(span, 3) {
        for c in 0..r {
            let f = f.clone();
            let label = if r == 1 { name.clone() } else { format!("{name}·e{}", c + 1) };
            out.push(TestFunction::new(label, lip, sup, move |t| {
                let mut v = vec![0.0; r];
                v[c] = f(t);
                v
            }));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shape() {
        let one = test_catalog((0.0, 1.0), 1);
        assert_eq!(one.len(), 2 + 8 + 9);
        assert_eq!(test_catalog((0.0, 1.0), 3).len(), 3 * one.len());
        let hat = one.iter().find(|g| g.name == "hat4/8").unwrap();
        assert_eq!(hat.eval(0.5), vec![1.0]);
        assert_eq!(hat.eval(0.625), vec![0.0]);
    }

    #[test]
    fn lipschitz_constants_hold_on_a_grid() {
        for g in test_catalog((-1.0, 2.0), 2) {
            for i in 0..300 {
                let (a, b) = (-1.0 + 0.01 * i as f64, -1.0 + 0.01 * (i + 1) as f64);
                let d: f64 = g.eval(a).iter().zip(g.eval(b)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                assert!(d <= g.modulus(b - a) + 1e-12, "{}", g.name);
            }
        }
    }
}
