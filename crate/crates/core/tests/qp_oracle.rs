mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tizx::qp::{kkt_residuals, solve_qp, QpSettings};

#[test]
fn interior_point_matches_active_set_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=10);
        let p = common::random_qp(&mut rng, n, m);
        let (_, f_ref) = common::active_set_oracle(&p).expect("feasible by construction");
        let sol = solve_qp(&p, QpSettings::default()).unwrap();
        let f = p.objective(&sol.x);
        assert!((f - f_ref).abs() <= 1e-6 * (1.0 + f_ref.abs()), "n={n} m={m}: {f} vs {f_ref}");
        let kkt = kkt_residuals(&p, &sol.x, &sol.duals);
        assert!(kkt.within(1e-8, sol.x.amax()), "{kkt:?}");
    }
}

#[test]
fn long_frames_stay_solvable() {
    use tizx::precoding::solve_qos;
    use tizx::signal_chain::{SignalOperators, SystemConfig};
    use tizx::zx_modem::{forward_map, Symbol, ZxAlphabet};

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (m_rx, n) in [(2, 8), (3, 4), (3, 6)] {
        let ops = SignalOperators::build(&SystemConfig::new(n, m_rx)).unwrap();
        let alphabet = ZxAlphabet::new(m_rx).unwrap();
        for _ in 0..10 {
            let syms: Vec<Symbol> = (0..n).map(|_| Symbol(rng.random_range(0..alphabet.size()))).collect();
            let frame = forward_map(&syms, 1, &alphabet).unwrap().with_pilot();
            let sol = solve_qos(&frame, &ops, 2.0, 1.0, QpSettings::default()).unwrap();
            assert!(sol.min_margin >= 2.0 - 1e-8, "m_rx={m_rx} n={n}: {}", sol.min_margin);
            assert!(sol.kkt.within(1e-8, sol.p.amax()), "{:?}", sol.kkt);
        }
    }
}
