use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;

use cklef::{parse_document, CkDocument, EndoBlock};
use cklef_core::index::stabilized_index;
use cklef_core::random::{sample, SamplerConfig};
use cklef_core::{GeometricEndomorphism, TransitionMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn load(path: &str) -> CkDocument {
    parse_document(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn first(doc: &CkDocument) -> GeometricEndomorphism {
    doc.build(doc.endomorphism(None).unwrap()).unwrap()
}

fn emit(args: &[&str]) -> CkDocument {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.ck");
    let status = Command::new(env!("CARGO_BIN_EXE_cklef")).args(args).arg("--out").arg(&out).output().unwrap().status;
    assert!(status.success(), "{args:?}");
    load(out.to_str().unwrap())
}

#[test]
fn power_output_revalidates() {
    let main = first(&load(&data("main.ck")));
    for n in [0u32, 1, 2, 3] {
        let doc = emit(&["power", &data("main.ck"), "--n", &n.to_string()]);
        let e = first(&doc);
        let expected = main.power(n).unwrap();
        assert!(e.is_valid());
        assert!(e.same_images(&expected).unwrap(), "n = {n}");
        assert_eq!(stabilized_index(&e).unwrap(), stabilized_index(&expected).unwrap());
    }
}

#[test]
fn compose_output_revalidates() {
    let pair = data("pair.ck");
    let doc = load(&pair);
    let e = first(&doc);
    let f = doc.build(doc.endomorphism(Some("F")).unwrap()).unwrap();

    let out = emit(&["compose", &pair]);
    assert!(first(&out).same_images(&e.compose(&f).unwrap()).unwrap());
    assert!(first(&out).same_images(&e).unwrap());

    let out = emit(&["compose", &pair, "--outer", "E", "--inner", "E", "--name", "G"]);
    assert_eq!(out.endomorphisms[0].name, "G");
    let squared = out.build(out.endomorphism(Some("G")).unwrap()).unwrap();
    assert!(squared.same_images(&e.power(2).unwrap()).unwrap());
    assert_eq!(stabilized_index(&squared).unwrap(), 1);
}

#[test]
fn emitted_documents_are_stable() {
    let doc = emit(&["power", &data("main.ck"), "--n", "2"]);
    let text = doc.to_text();
    assert_eq!(parse_document(&text).unwrap().to_text(), text);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_endomorphisms_survive_serialization(seed in any::<u64>(), which in 0usize..3) {
        let rows: Vec<Vec<i64>> = match which {
            0 => vec![vec![1, 1, 0], vec![1, 1, 1], vec![0, 1, 1]],
            1 => vec![vec![1, 1], vec![1, 0]],
            _ => vec![vec![1, 1, 1], vec![1, 1, 1], vec![1, 1, 1]],
        };
        let a = Arc::new(TransitionMatrix::new(&rows).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e, _) = sample(&mut rng, &a, &SamplerConfig::default()).unwrap();
        let doc = CkDocument { matrix: a.clone(), endomorphisms: vec![EndoBlock::from_endomorphism("S", &e)] };
        let parsed = parse_document(&doc.to_text()).unwrap();
        let back = parsed.build(parsed.endomorphism(Some("S")).unwrap()).unwrap();
        prop_assert!(back.same_images(&e).unwrap());
        prop_assert_eq!(stabilized_index(&back).unwrap(), stabilized_index(&e).unwrap());
    }
}
