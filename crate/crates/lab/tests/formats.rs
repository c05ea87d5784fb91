use lqg_core::field::{FieldTag, GffSampler};
use lqg_core::measure::{build_measure, build_measure_discrete};
use lqg_core::{DomainKind, DomainSpec};
use lqg_lab::io::{
    decode_field, decode_measure, encode_field, encode_measure, read_bytes, read_csv, write_bytes,
    Cell, Provenance, Table,
};
use lqg_lab::{Experiment, RunConfig};

#[test]
fn field_and_measure_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [
        DomainKind::Torus,
        DomainKind::DirichletSquare,
        DomainKind::MixedSquare,
    ] {
        let spec = DomainSpec::new(kind, 32, 2.0).unwrap();
        let f = GffSampler::new(spec).unwrap().sample(11);
        let p = dir.path().join(format!("{}.lqgf", kind.name()));
        write_bytes(&p, &encode_field(&f)).unwrap();
        let back = decode_field(&read_bytes(&p).unwrap()).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.seed(), f.seed());
        assert_eq!(back.tag(), f.tag());
        assert_eq!(back.spec(), f.spec());

        for m in [
            build_measure_discrete(&f, 1.0).unwrap(),
            build_measure(&f, 0.5, 0.25).unwrap(),
        ] {
            let back = decode_measure(&encode_measure(&m)).unwrap();
            assert_eq!(back.masses(), m.masses());
            assert_eq!(back.gamma(), m.gamma());
            assert_eq!(back.regularization(), m.regularization());
        }
    }
}

#[test]
fn corrupt_binaries_are_rejected() {
    let spec = DomainSpec::unit(DomainKind::Torus, 16).unwrap();
    let bytes = encode_field(&GffSampler::new(spec).unwrap().sample(1));
    assert!(decode_field(&bytes[..bytes.len() - 1]).is_err());
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(decode_field(&extra).is_err());
    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(decode_field(&magic).is_err());
    assert!(decode_measure(&bytes).is_err());
    assert_eq!(decode_field(&bytes).unwrap().tag(), FieldTag::Centered);
}

#[test]
fn csv_quotes_and_provenance_round_trip() {
    let cfg = RunConfig::preset(Experiment::Kpz);
    let prov = Provenance::of(&cfg);
    let mut t = Table::new(&["name", "value", "count"]);
    t.push(vec!["plain".into(), Cell::Real(0.1), 3usize.into()]);
    t.push(vec![
        "with, comma".into(),
        Cell::Real(-1e-300),
        0usize.into(),
    ]);
    t.push(vec![
        "say \"hi\"\nthere".into(),
        Cell::Real(2.0 / 3.0),
        7usize.into(),
    ]);
    let text = t.to_csv(&prov);
    assert!(text.starts_with(&format!(
        "# lqg {} config={} seed=1\r\n",
        prov.version,
        cfg.hash()
    )));
    let (p, rows) = read_csv(&text).unwrap();
    assert_eq!(p, Some(prov));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], ["name", "value", "count"]);
    assert_eq!(rows[2][0], "with, comma");
    assert_eq!(rows[3][0], "say \"hi\"\nthere");
    assert_eq!(rows[3][1].parse::<f64>().unwrap(), 2.0 / 3.0);
    assert_eq!(rows[2][1].parse::<f64>().unwrap(), -1e-300);
}

#[test]
fn config_hash_tracks_content() {
    let a = RunConfig::preset(Experiment::Moments);
    let mut b = a.clone();
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 16);
    b.seed = 2;
    assert_ne!(a.hash(), b.hash());
}
