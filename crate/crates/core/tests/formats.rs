use std::path::Path;

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use tempfile::TempDir;

use remi::io::*;
use remi::model::{BlockPartition, CoefficientPath, MarginalVector, SparseVector, SummaryStats};
use remi::selection::bic_from_parts;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        -1e-6f64..1e-6,
        Just(0.0),
        Just(-0.0),
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
    ]
}

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![1e-8f64..10.0, 1e-300f64..1e-200]
}

fn standard_error() -> impl Strategy<Value = f64> {
    prop_oneof![1e-8f64..10.0, 1e-150f64..1e-100]
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn matrix() -> impl Strategy<Value = Array2<f64>> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        prop::collection::vec(finite(), r * c)
            .prop_map(move |v| Array2::from_shape_vec((r, c), v).unwrap())
    })
}

fn path_strategy() -> impl Strategy<Value = (CoefficientPath, usize)> {
    (1usize..8, 1usize..6).prop_flat_map(|(p, d)| {
        (
            prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0f64), finite()], p), d),
            prop::collection::vec(0.01f64..2.0, d),
            prop::collection::vec(finite(), d),
            prop::collection::vec(any::<bool>(), d),
            prop::collection::vec(0usize..10_000, d),
            Just(p),
        )
            .prop_map(|(coefs, steps, objective, converged, sweeps, p)| {
                let mut lambdas = Vec::new();
                let mut lam = 100.0;
                for s in steps {
                    lam /= 1.0 + s;
                    lambdas.push(lam);
                }
                let coefs: Vec<SparseVector> =
                    coefs.into_iter().map(|c| SparseVector::from_dense(Array1::from(c).view())).collect();
                let df = coefs.iter().map(SparseVector::nnz).collect();
                (
                    CoefficientPath {
                        lambdas,
                        coefs,
                        objective,
                        df,
                        converged,
                        sweeps,
                    },
                    p,
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn summary_round_trips(
        rows in prop::collection::vec((finite(), standard_error()), 1..30),
        n in 1usize..1_000_000,
    ) {
        let dir = TempDir::new().unwrap();
        let file = dir.path().join("s.tsv");
        let stats = SummaryStats {
            beta_m: rows.iter().map(|r| r.0).collect(),
            s2: rows.iter().map(|r| r.1 * r.1).collect(),
            n,
        };
        write_summary(&file, &stats).unwrap();
        let back = read_summary(&file).unwrap();
        prop_assert!(same_bits(back.beta_m.as_slice().unwrap(), stats.beta_m.as_slice().unwrap()));
        prop_assert!(same_bits(back.s2.as_slice().unwrap(), stats.s2.as_slice().unwrap()));
        prop_assert_eq!(back.n, n);
    }

    #[test]
    fn marginal_round_trips(
        values in prop::collection::vec(finite(), 1..30),
        n in 1usize..1_000_000,
        ysq in prop::option::of(positive()),
    ) {
        let dir = TempDir::new().unwrap();
        let file = dir.path().join("m.tsv");
        let m = MarginalVector { values: Array1::from(values), n, y_sq_mean: ysq };
        write_marginal(&file, &m).unwrap();
        let back = read_marginal(&file).unwrap();
        prop_assert!(same_bits(back.values.as_slice().unwrap(), m.values.as_slice().unwrap()));
        prop_assert_eq!(back.n, n);
        prop_assert_eq!(back.y_sq_mean.map(f64::to_bits), ysq.map(f64::to_bits));
    }

    #[test]
    fn matrices_round_trip_in_both_layouts(m in matrix()) {
        let dir = TempDir::new().unwrap();
        let bin = dir.path().join("m.bin");
        let txt = dir.path().join("m.txt");
        write_matrix_binary(&bin, &m).unwrap();
        write_matrix_text(&txt, &m).unwrap();
        let a = read_matrix(&bin).unwrap();
        let b = read_matrix(&txt).unwrap();
        prop_assert_eq!(a.dim(), m.dim());
        prop_assert!(same_bits(a.as_slice().unwrap(), m.as_slice().unwrap()));
        prop_assert!(same_bits(b.as_slice().unwrap(), m.as_slice().unwrap()));
    }

    #[test]
    fn truncated_or_padded_binary_is_rejected(m in matrix(), cut in 1usize..9, pad in 1usize..9) {
        let bytes = encode_binary(&m);
        let p = Path::new("x.bin");
        prop_assert!(decode_binary(p, &bytes[..bytes.len() - cut]).is_err());
        let mut longer = bytes.clone();
        longer.extend(std::iter::repeat_n(0u8, pad));
        prop_assert!(decode_binary(p, &longer).is_err());
    }

    #[test]
    fn text_with_ragged_row_is_rejected(m in matrix()) {
        prop_assume!(m.nrows() > 1);
        let mut text = String::new();
        for (i, row) in m.rows().into_iter().enumerate() {
            let mut fields: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            if i == m.nrows() - 1 {
                fields.push("1".into());
            }
            text.push_str(&fields.join(" "));
            text.push('\n');
        }
        prop_assert!(decode_text(Path::new("x.txt"), &text).is_err());
    }

    #[test]
    fn partition_round_trips(widths in prop::collection::vec(1usize..20, 1..15)) {
        let dir = TempDir::new().unwrap();
        let file = dir.path().join("b.txt");
        let mut start = 0;
        let blocks = widths
            .iter()
            .map(|w| {
                let r = start..start + w;
                start += w;
                r
            })
            .collect();
        let part = BlockPartition::new(blocks);
        write_partition(&file, &part).unwrap();
        prop_assert_eq!(read_partition(&file).unwrap(), part);
    }

    #[test]
    fn path_round_trips((fit, p) in path_strategy()) {
        let dir = TempDir::new().unwrap();
        let grid = dir.path().join("lambdas.csv");
        let coefs = dir.path().join("path.csv");
        write_lambdas_csv(&grid, &fit).unwrap();
        write_path_csv(&coefs, &fit).unwrap();
        let back = read_path(&grid, &coefs, p).unwrap();
        prop_assert!(same_bits(&back.lambdas, &fit.lambdas));
        prop_assert!(same_bits(&back.objective, &fit.objective));
        prop_assert_eq!(&back.df, &fit.df);
        prop_assert_eq!(&back.converged, &fit.converged);
        prop_assert_eq!(&back.sweeps, &fit.sweeps);
        for (a, b) in back.coefs.iter().zip(&fit.coefs) {
            prop_assert_eq!(&a.indices, &b.indices);
            prop_assert!(same_bits(&a.values, &b.values));
        }
    }

    #[test]
    fn bic_round_trips(loss in prop::collection::vec(-1e4f64..1e4, 1..20), n in 2usize..100_000) {
        let dir = TempDir::new().unwrap();
        let file = dir.path().join("bic.csv");
        let d = loss.len();
        let lambdas: Vec<f64> = (0..d).map(|l| 3.0 / (1.0 + l as f64)).collect();
        let df: Vec<usize> = (0..d).collect();
        let table = bic_from_parts(&lambdas, &loss, &df, n).unwrap();
        write_bic_csv(&file, &table).unwrap();
        let back = read_bic_csv(&file).unwrap();
        prop_assert!(same_bits(&back.bic, &table.bic));
        prop_assert!(same_bits(&back.loss, &table.loss));
        prop_assert_eq!(back.chosen, table.chosen);
    }
}

fn write(dir: &TempDir, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn summary_parser_rejects_what_the_writer_never_emits() {
    let dir = TempDir::new().unwrap();
    let cases = [
        "id\tbeta\tse\n0\t0.1\t0.2\n",
        "id\tbeta\tse\tn\n0\t0.1\t0.2\t100\textra\n",
        "id\tbeta\tse\tn\n0\t0.1\t0\t100\n",
        "id\tbeta\tse\tn\n0\t0.1\t-1\t100\n",
        "id\tbeta\tse\tn\n0\tNaN\t0.2\t100\n",
        "id\tbeta\tse\tn\n0\t0.1\t0.2\t100\n1\t0.1\t0.2\t101\n",
        "id\tbeta\tse\tn\n\t0.1\t0.2\t100\n",
        "id\tbeta\tse\tn\n",
        "",
    ];
    for (i, body) in cases.iter().enumerate() {
        let p = write(&dir, &format!("s{i}.tsv"), body);
        assert!(read_summary(&p).is_err(), "case {i} accepted");
    }
}

#[test]
fn marginal_parser_rejects_mixed_ysq() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "m.tsv", "id\tytilde\tn\tysq\n0\t0.1\t10\t1.0\n1\t0.2\t10\tNA\n");
    assert!(read_marginal(&p).is_err());
}

#[test]
fn path_parser_rejects_inconsistent_files() {
    let dir = TempDir::new().unwrap();
    let grid = write(
        &dir,
        "lambdas.csv",
        "step,lambda,objective,df,converged,sweeps\n0,2.0,-1.0,1,true,3\n1,1.0,-2.0,1,true,4\n",
    );
    let bad = [
        "step,lambda,index,value,converged\n0,2.0,0,0.5,true\n1,1.5,0,0.7,true\n",
        "step,lambda,index,value,converged\n1,1.0,0,0.7,true\n0,2.0,0,0.5,true\n",
        "step,lambda,index,value,converged\n0,2.0,0,0.5,false\n1,1.0,0,0.7,true\n",
        "step,lambda,index,value,converged\n0,2.0,5,0.5,true\n1,1.0,0,0.7,true\n",
        "step,lambda,index,value,converged\n0,2.0,0,0.0,true\n1,1.0,0,0.7,true\n",
        "step,lambda,index,value,converged\n0,2.0,0,0.5,true\n2,0.5,0,0.7,true\n",
    ];
    for (i, body) in bad.iter().enumerate() {
        let coefs = write(&dir, &format!("p{i}.csv"), body);
        assert!(read_path(&grid, &coefs, 3).is_err(), "case {i} accepted");
    }
    let good = write(
        &dir,
        "good.csv",
        "step,lambda,index,value,converged\n0,2.0,0,0.5,true\n1,1.0,2,0.7,true\n",
    );
    assert!(read_path(&grid, &good, 3).is_ok());
}

#[test]
fn partition_parser_rejects_gaps_and_overlaps() {
    let dir = TempDir::new().unwrap();
    for (i, body) in ["0 3\n4 6\n", "0 3\n2 6\n", "0 3\n3 3\n", "0\n", "a b\n"].iter().enumerate() {
        let p = write(&dir, &format!("b{i}.txt"), body);
        assert!(read_partition(&p).is_err(), "case {i} accepted");
    }
}
