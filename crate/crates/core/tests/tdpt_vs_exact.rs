use accel_entangle::correlators::correlator_set;
use accel_entangle::entanglement::covariance;
use accel_entangle::field::RegulatorScheme;
use accel_entangle::params::ModelParams;
use accel_entangle::rdm::{gtilde_assemble, truncated_rdm};
use accel_entangle::tdpt::{tdpt_element, Which};

fn exact(p: &ModelParams, tau: f64) -> (f64, f64) {
    let c = correlator_set(p, tau, 1e-10).unwrap();
    let v = covariance(&c, p.hbar).unwrap();
    let r = truncated_rdm(&gtilde_assemble(&v, p).unwrap(), p).unwrap();
    (r.r1100().norm(), r.r1010().norm())
}

#[test]
fn tdpt_tracks_exact_in_perturbative_window() {
    let p = ModelParams::new(1e-4, 1.3, 2.0, -20.0);
    let s = RegulatorScheme::modified(p.eps_phys());
    for tau in [-5.0, 0.0, 10.0, 20.0] {
        let (x1100, x1010) = exact(&p, tau);
        let t1100 = tdpt_element(&p, Which::R1100, tau, s, 1e-11).unwrap().value.norm();
        let t1010 = tdpt_element(&p, Which::R1010, tau, s, 1e-11).unwrap().value.norm();
        println!("{tau}: r1100 {x1100:e} vs {t1100:e}; r1010 {x1010:e} vs {t1010:e}");
        assert!((t1100 / x1100 - 1.0).abs() < 0.1, "{tau}: {t1100} vs {x1100}");
        assert!((t1010 / x1010 - 1.0).abs() < 0.1, "{tau}: {t1010} vs {x1010}");
    }
}
