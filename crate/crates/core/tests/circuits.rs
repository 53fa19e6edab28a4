use boundent::circuit::{Circuit, Control, Gate, Polarity};
use boundent::qmat::{max_norm_distance, ComplexMatrix, PureState, C64};
use boundent::rng::{random_pure_state, SplitMix64};
use proptest::prelude::*;

/// Haar-ish unitary on `k` qubits from Gram-Schmidt on a Gaussian matrix.
fn random_unitary(k: usize, rng: &mut SplitMix64) -> ComplexMatrix {
    let d = 1 << k;
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| rng.complex_normal()).collect();
        for u in &cols {
            let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= dot * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(d, |r, c| cols[c][r])
}

fn random_gate(n: usize, rng: &mut SplitMix64) -> Gate {
    let mut qubits: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        qubits.swap(i, j);
    }
    let n_targets = 1 + (rng.next_u64() % 2.min(n as u64)) as usize;
    let n_controls = (rng.next_u64() % (n - n_targets + 1) as u64) as usize;
    let targets = qubits[..n_targets].to_vec();
    let controls = qubits[n_targets..n_targets + n_controls]
        .iter()
        .map(|&q| {
            if rng.next_u64() % 2 == 0 {
                Control::on_one(q)
            } else {
                Control::on_zero(q)
            }
        })
        .collect();
    let u = random_unitary(n_targets, rng);
    let g = Gate::new("U", u, targets, controls).unwrap();
    if n_controls > 0 && rng.next_u64() % 3 == 0 {
        let phases = (0..1 << n_controls)
            .map(|_| rng.uniform(-3.0, 3.0))
            .collect();
        g.with_control_phases(phases).unwrap()
    } else {
        g
    }
}

/// Reference action, one basis column at a time.
fn oracle_apply(g: &Gate, n: usize, psi: &[C64]) -> Vec<C64> {
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
    let mask = |q: usize| 1usize << (n - 1 - q);
    let mut out = vec![C64::new(0.0, 0.0); psi.len()];
    for (x, &amp) in psi.iter().enumerate() {
        let pattern = g
            .controls()
            .iter()
            .fold(0, |acc, c| (acc << 1) | bit(x, c.qubit));
        let phase = g
            .control_phases()
            .map(|p| C64::from_polar(1.0, p[pattern]))
            .unwrap_or(C64::new(1.0, 0.0));
        let fires = g.controls().iter().all(|c| {
            bit(x, c.qubit)
                == match c.polarity {
                    Polarity::OnOne => 1,
                    Polarity::OnZero => 0,
                }
        });
        if !fires {
            out[x] += phase * amp;
            continue;
        }
        let t = g.targets();
        let col = t.iter().fold(0, |acc, &q| (acc << 1) | bit(x, q));
        let base = t.iter().fold(x, |acc, &q| acc & !mask(q));
        for row in 0..1 << t.len() {
            let y = t.iter().enumerate().fold(base, |acc, (i, &q)| {
                if (row >> (t.len() - 1 - i)) & 1 == 1 {
                    acc | mask(q)
                } else {
                    acc
                }
            });
            out[y] += phase * g.unitary()[(row, col)] * amp;
        }
    }
    out
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fast_path_matches_oracle_and_expansion(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = SplitMix64::new(seed);
        let g = random_gate(n, &mut rng);
        let psi = random_pure_state(n, &mut rng);
        let fast = g.apply(&psi).unwrap();
        let want = oracle_apply(&g, n, psi.amplitudes());
        prop_assert!(max_diff(fast.amplitudes(), &want) <= 1e-12);
        let slow = g.expand(n).unwrap().matvec(psi.amplitudes());
        prop_assert!(max_diff(&slow, &want) <= 1e-12);
    }

    #[test]
    fn run_preserves_norm(seed in any::<u64>(), n in 1usize..=6, len in 1usize..20) {
        let mut rng = SplitMix64::new(seed);
        let mut c = Circuit::new(n).unwrap();
        for _ in 0..len {
            if n == 1 {
                c.push(Gate::hadamard(0)).unwrap();
            } else {
                c.push(random_gate(n, &mut rng)).unwrap();
            }
        }
        let psi = random_pure_state(n, &mut rng);
        let out = c.run(&psi).unwrap();
        prop_assert!((out.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn open_controls_equal_x_conjugation(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = SplitMix64::new(seed);
        let g = random_gate(n, &mut rng);
        // the phase function is indexed by control values, so only the
        // phase-free gate is an X-conjugate of its flipped twin
        let g = Gate::new("U", g.unitary().clone(), g.targets().to_vec(), g.controls().to_vec())
            .unwrap();
        let mut conj = Circuit::new(n).unwrap();
        for c in g.controls() {
            conj.push(Gate::x(c.qubit)).unwrap();
        }
        conj.push(g.with_flipped_controls()).unwrap();
        for c in g.controls() {
            conj.push(Gate::x(c.qubit)).unwrap();
        }
        let psi = random_pure_state(n, &mut rng);
        let a = g.apply(&psi).unwrap();
        let b = conj.run(&psi).unwrap();
        prop_assert!(max_diff(a.amplitudes(), b.amplitudes()) <= 1e-12);
    }
}

#[test]
fn toffoli_and_cnot_are_permutations() {
    let gates = [
        Gate::cnot(0, 3).unwrap(),
        Gate::cnot(4, 1).unwrap(),
        Gate::toffoli3([0, 1, 2], 5).unwrap(),
        Gate::toffoli3([5, 3, 1], 0).unwrap(),
        Gate::controlled_not(vec![Control::on_zero(2), Control::on_one(0)], 4).unwrap(),
    ];
    for g in gates {
        let u = g.expand(6).unwrap();
        for r in 0..64 {
            let row = u.row(r);
            assert!(row
                .iter()
                .all(|z| *z == C64::new(0.0, 0.0) || *z == C64::new(1.0, 0.0)));
            assert_eq!(row.iter().filter(|z| z.re == 1.0).count(), 1);
        }
    }
}

#[test]
fn control_phases_cancel_on_ancilla_trace() {
    // A phase that depends only on control values drops out of the reduced
    // state of the target.
    let mut rng = SplitMix64::new(3);
    let phases: Vec<f64> = (0..8).map(|_| rng.uniform(-3.0, 3.0)).collect();
    let plain = Gate::toffoli3([0, 1, 2], 3).unwrap();
    let phased = plain.clone().with_control_phases(phases).unwrap();
    let sys = random_pure_state(3, &mut rng);
    let psi = sys.tensor(&PureState::basis(1, 0));
    let a = plain.apply(&psi).unwrap().to_density();
    let b = phased.apply(&psi).unwrap().to_density();
    let ra = a.partial_trace(&[3]).unwrap();
    let rb = b.partial_trace(&[3]).unwrap();
    assert!(max_norm_distance(ra.matrix(), rb.matrix()).unwrap() <= 1e-12);
}
