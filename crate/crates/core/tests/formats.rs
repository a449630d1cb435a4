use ising_core::circuit::{gates, TruthTable};
use ising_core::residual::ResidualPartition;
use ising_core::synth::{self, Mode};
use ising_core::voronoi::AffineEmbedding;
use ising_core::{constraints, Circuit, Convention, Execution, Hamiltonian};

fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn data_tables_round_trip_in_both_conventions() {
    for entry in std::fs::read_dir(data_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "tt") {
            continue;
        }
        let c = Circuit::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        for conv in [Convention::Spin, Convention::Boolean] {
            let text = c.to_text(conv);
            assert_eq!(Circuit::parse(&text).unwrap(), c, "{}", path.display());
            assert_eq!(TruthTable::parse(&text).unwrap().convention, conv);
        }
    }
}

#[test]
fn synthesized_hamiltonian_text_round_trip() {
    let c = Circuit::parse(&std::fs::read_to_string(data_dir().join("type2_4x2.tt")).unwrap()).unwrap();
    let h = synth::synthesize(&c, Mode::Global).unwrap().hamiltonian.unwrap();
    let back = Hamiltonian::parse(&h.to_text()).unwrap();
    assert_eq!(back, h);
    assert_eq!(back.pack(), h.pack());
}

#[test]
fn embedding_text_round_trip() {
    let e = AffineEmbedding::new(vec![vec![0.1, -2.5], vec![1.0 / 3.0, 0.0]], vec![0.5, -0.75]).unwrap();
    assert_eq!(AffineEmbedding::parse(&e.to_text()).unwrap(), e);
    assert!(AffineEmbedding::parse("emb 2 1\n1\n").is_err());
}

#[test]
fn constraint_dump_has_one_line_per_row() {
    let c = gates::xor(2).glue(&gates::and(2)).unwrap();
    let sys = constraints::local_min_free_rows(&c);
    let dump = sys.to_text();
    let rows = dump.lines().filter(|l| l.contains(">=")).count();
    assert_eq!(rows, 4 * 3);
    assert!(dump.lines().filter(|l| l.contains(">=")).all(|l| l.contains("kind=")));
}

#[test]
fn ppm_has_header_and_pixels() {
    let raster = ResidualPartition::pair(1.0).rasterize(2.0, 16, 1e-9, Execution::Sequential).unwrap();
    let ppm = raster.to_ppm();
    assert!(ppm.starts_with("P3\n16 16\n255\n"));
    assert_eq!(ppm.lines().skip(3).map(|l| l.split_whitespace().count()).sum::<usize>(), 16 * 16 * 3);
    assert_eq!(raster.legend().lines().filter(|l| !l.starts_with('#')).count(), 5);
}
