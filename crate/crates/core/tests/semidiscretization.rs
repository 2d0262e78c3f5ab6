use mcs_adi::linalg::{DenseMatrix, ScaledVector};
use mcs_adi::semidiscretize::{
    assemble, initial_vector, model_initial, Coefficients, Grid2D, ProblemSpec, SplitSystem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Point-by-point assembly written without the line operators: returns the
/// three parts and the three source bases at `t = 0`.
fn reference_assembly(p: &ProblemSpec<f64>, m1: usize, m2: usize) -> (Vec<DenseMatrix<f64>>, Vec<Vec<f64>>) {
    let c = *p.coefficients();
    let (hx, hy) = (1.0 / (m1 + 1) as f64, 1.0 / (m2 + 1) as f64);
    let n = m1 * m2;
    let mut parts = vec![DenseMatrix::zeros(n, n); 3];
    let mut sources = vec![vec![0.0; n]; 3];
    let idx = |i: i64, j: i64| (i - 1) as usize + m1 * (j - 1) as usize;
    let inside = |i: i64, j: i64| i >= 1 && i <= m1 as i64 && j >= 1 && j <= m2 as i64;
    let bval = |i: i64, j: i64| p.boundary_value(i as f64 * hx, j as f64 * hy, 0.0);
    for j in 1..=m2 as i64 {
        for i in 1..=m1 as i64 {
            let row = idx(i, j);
            let mut put = |part: usize, ii: i64, jj: i64, w: f64| {
                if inside(ii, jj) {
                    parts[part][(row, idx(ii, jj))] += w;
                } else {
                    sources[part][row] += w * bval(ii, jj);
                }
            };
            // x direction
            let (dx2, cx) = (c.d11 / (hx * hx), c.c1 / (2.0 * hx));
            put(1, i - 1, j, dx2);
            put(1, i, j, -2.0 * dx2);
            put(1, i + 1, j, dx2);
            if i == m1 as i64 {
                put(1, i, j, 3.0 * cx);
                put(1, i - 1, j, -4.0 * cx);
                put(1, i - 2, j, cx);
            } else {
                put(1, i + 1, j, cx);
                put(1, i - 1, j, -cx);
            }
            // y direction
            let (dy2, cy) = (c.d22 / (hy * hy), c.c2 / (2.0 * hy));
            put(2, i, j - 1, dy2);
            put(2, i, j, -2.0 * dy2);
            put(2, i, j + 1, dy2);
            if j == m2 as i64 {
                put(2, i, j, 3.0 * cy);
                put(2, i, j - 1, -4.0 * cy);
                put(2, i, j - 2, cy);
            } else {
                put(2, i, j + 1, cy);
                put(2, i, j - 1, -cy);
            }
            // mixed term 2 d12 u_xy
            let w = 2.0 * c.d12 / (4.0 * hx * hy);
            put(0, i + 1, j + 1, w);
            put(0, i - 1, j - 1, w);
            put(0, i + 1, j - 1, -w);
            put(0, i - 1, j + 1, -w);
        }
    }
    (parts, sources)
}

#[test]
fn dense_expansion_matches_pointwise_assembly() {
    for (m1, m2) in [(10, 10), (6, 9)] {
        let p = ProblemSpec::model();
        let op = assemble(&p, &Grid2D::new(m1, m2).unwrap()).unwrap();
        let dense = op.to_dense().unwrap();
        let (parts, sources) = reference_assembly(&p, m1, m2);
        for j in 0..3 {
            let scale = parts[j].max_abs().max(1.0);
            assert!(dense.part(j).sub(&parts[j]).unwrap().max_abs() <= 1e-12 * scale, "part {j}");
            let s = dense.source_bases()[j].as_slice();
            for (a, b) in s.iter().zip(&sources[j]) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "source {j}");
            }
        }
        // apply_full against the dense A v + g(t)
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = ScaledVector::from_fn(m1 * m2, |_| rng.random_range(-1.0..1.0));
        let t = 0.7;
        let full = op.apply_full(t, &v).unwrap();
        let mut want = dense.full_matrix().matvec(&v).unwrap();
        want.axpy((-p.decay() * t).exp(), &dense.total_source_base());
        assert!(full.relative_distance(&want) <= 1e-12);
    }
}

#[test]
fn parts_sum_to_full_operator() {
    let p = ProblemSpec::model();
    let op = assemble(&p, &Grid2D::new(12, 9).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let v = ScaledVector::from_fn(108, |_| rng.random_range(-1.0..1.0));
        let t = rng.random_range(0.0..2.0);
        let mut sum = ScaledVector::zeros(108);
        for j in 0..=2 {
            sum.axpy(1.0, &op.eval_part(j, t, &v).unwrap());
        }
        let full = op.apply_full(t, &v).unwrap();
        assert!(full.relative_distance(&sum) <= 1e-12);
        let mut g = ScaledVector::zeros(108);
        for j in 0..=2 {
            g.axpy(1.0, &op.source(j, t));
        }
        let g_full = op.apply_full(t, &ScaledVector::zeros(108)).unwrap();
        assert!(g.relative_distance(&g_full) <= 1e-13);
    }
}

/// `L u` for the benchmark initial function, from its closed-form derivatives.
fn analytic_operator(c: &Coefficients<f64>, x: f64, y: f64) -> f64 {
    use std::f64::consts::PI;
    let u = model_initial(x, y);
    let px = -4.0 * PI * (2.0 * PI * x).sin();
    let pxx = -8.0 * PI * PI * (2.0 * PI * x).cos();
    let py = 4.0 * PI * (2.0 * PI * y).sin();
    let pyy = 8.0 * PI * PI * (2.0 * PI * y).cos();
    let (ux, uy) = (px * u, py * u);
    let (uxx, uyy, uxy) = ((pxx + px * px) * u, (pyy + py * py) * u, px * py * u);
    c.d11 * uxx + 2.0 * c.d12 * uxy + c.d22 * uyy + c.c1 * ux + c.c2 * uy
}

#[test]
fn spatial_truncation_error_is_second_order() {
    let p = ProblemSpec::model();
    let residual = |m: usize| {
        let grid = Grid2D::square(m).unwrap();
        let op = assemble(&p, &grid).unwrap();
        let u = initial_vector(&p, &grid);
        let lu = op.apply_full(0.0, &u).unwrap();
        let exact = ScaledVector::from_fn(grid.len(), |k| {
            let (i, j) = (k % m, k / m);
            analytic_operator(p.coefficients(), grid.x(i as isize), grid.y(j as isize))
        });
        lu.sub(&exact).norm()
    };
    let errs: Vec<f64> = [19, 39, 79].iter().map(|&m| residual(m)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.7..=2.3).contains(&order), "order {order}, residuals {errs:?}");
    }
}

#[test]
fn constant_state_on_constant_boundary_is_stationary() {
    let p = ProblemSpec::<f64>::model().with_initial(|_, _| 1.0);
    let grid = Grid2D::new(8, 11).unwrap();
    let op = assemble(&p, &grid).unwrap();
    for t in [0.0f64, 0.9, 2.0] {
        let state = ScaledVector::from_fn(grid.len(), |_| (-p.decay() * t).exp());
        let rhs = op.apply_full(t, &state).unwrap();
        // u = e^{-rt} is constant in space, so the spatial operator vanishes.
        assert!(rhs.max_abs() < 1e-10, "{}", rhs.max_abs());
    }
}
