use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qbanyan_core::banyan::{
    enumerate_blocking, network_monte_carlo, route, BanyanTopology, Packet, TrafficSpec,
};
use qbanyan_core::gates::{fission_pair, fredkin_pair, fuse_pair, FeedForward};
use qbanyan_core::switch::{oqsu, SwitchControls};
use qbanyan_core::{
    DetectorModel, FockConfig, Mode, PhotonicState, Polarization, QubitSpec, RoutingMode, Unitary,
    Wiring,
};

fn bench_mode_map(c: &mut Criterion) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let bs = Unitary::new(vec![
        vec![
            num_complex::Complex64::new(r, 0.0),
            num_complex::Complex64::new(r, 0.0),
        ],
        vec![
            num_complex::Complex64::new(r, 0.0),
            num_complex::Complex64::new(-r, 0.0),
        ],
    ])
    .unwrap();
    let ma = Mode::new("a", Polarization::H, 0).unwrap();
    let mb = Mode::new("b", Polarization::H, 0).unwrap();
    let mut cfg = FockConfig::vacuum();
    cfg.add_photons(ma.clone(), 1);
    cfg.add_photons(mb.clone(), 1);
    let state = PhotonicState::from_config(cfg);
    let modes = [ma, mb];
    c.bench_function("mode_map_hom_bunching", |b| {
        b.iter(|| black_box(&state).apply_mode_map(black_box(&modes), &bs).unwrap())
    });
}

fn bench_channels(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q1 = QubitSpec::random(&mut rng);
    let q2 = QubitSpec::random(&mut rng);

    c.bench_function("fredkin_channel", |b| {
        b.iter(|| fredkin_pair(black_box(&q1), black_box(&q2), true).unwrap())
    });

    c.bench_function("fuse_fission_roundtrip", |b| {
        b.iter(|| {
            let (_, fused) = fuse_pair(black_box(&q1), black_box(&q2), FeedForward::on()).unwrap();
            fission_pair(&fused, FeedForward::on()).unwrap()
        })
    });

    c.bench_function("switch_unit_fusion_row", |b| {
        let controls = SwitchControls::row(true, false, true);
        b.iter(|| {
            oqsu(
                black_box(&q1),
                black_box(&q2),
                controls,
                FeedForward::on(),
                &DetectorModel::ideal(),
            )
            .unwrap()
        })
    });
}

fn bench_routing(c: &mut Criterion) {
    let t8 = BanyanTopology::new(8, Wiring::OmegaShuffle).unwrap();
    let packets: Vec<Packet> = [3usize, 1, 4, 0, 5, 2, 7, 6]
        .iter()
        .enumerate()
        .map(|(i, &d)| Packet::basis(i, d))
        .collect();
    c.bench_function("route_n8_quantum", |b| {
        b.iter(|| {
            route(
                black_box(&packets),
                RoutingMode::QuantumFusion,
                &t8,
                FeedForward::on(),
            )
            .unwrap()
        })
    });

    let t4 = BanyanTopology::new(4, Wiring::OmegaShuffle).unwrap();
    c.bench_function("enumerate_n4_exhaustive", |b| {
        b.iter(|| enumerate_blocking(black_box(&t4), None).unwrap())
    });

    c.bench_function("network_mc_1k_trials", |b| {
        b.iter(|| {
            network_monte_carlo(
                black_box(&t8),
                &TrafficSpec::UniformRandom,
                FeedForward::on(),
                &DetectorModel::ideal(),
                1_000,
                7,
                false,
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, bench_mode_map, bench_channels, bench_routing);
criterion_main!(benches);
