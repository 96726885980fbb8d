use std::fmt::Write as _;

use cachecast::coded_caching::{
    build_multicast_codeword, codeword_length_bits, mds_decode, mds_encode, parse_frames, place_caches, recover_file,
    subsets, Library, MulticastCodeword,
};
use cachecast::curve::TrialCount;
use cachecast::montecarlo::trial_rng;
use num_rational::Ratio;

use crate::error::{CliError, CliResult};
use crate::output::Output;
use crate::ExperimentSpec;

pub fn deliver_demo(spec: &ExperimentSpec, out: &Output) -> CliResult<String> {
    let d = &spec.config.demo;
    let m: Ratio<u64> = d
        .cache_files
        .parse()
        .map_err(|e| CliError::Config(format!("cache size `{}`: {e}", d.cache_files)))?;
    let (k, n, n_e, l) = (d.users, d.files, d.edge_nodes, d.l);
    let mut rng = trial_rng(spec.config.seed(), 0);
    let library = Library::random(n, d.file_bytes, &mut rng)?;
    let assignment = place_caches(k, n, m, &library)?;
    let demand: Vec<usize> = d.demand.clone().unwrap_or_else(|| (0..k).map(|u| u % n.max(1)).collect());
    let codeword = build_multicast_codeword(&demand, &assignment, &library)?;
    let mu = m / Ratio::from_integer(n as u64);
    let formula_bits = codeword_length_bits(k as u64, mu, library.file_bits())?;
    let blocks = mds_encode(&codeword, l, n_e)?;
    let wire = blocks.to_wire();
    out.write_bytes("demo_blocks.bin", &wire)?;
    let frames = parse_frames(&wire)?;

    let mut report = String::new();
    let p = out.provenance(TrialCount::Analytic);
    let _ = writeln!(report, "# config_hash: {}", p.config_hash);
    let _ = writeln!(report, "# seed: {}", p.seed);
    let _ = writeln!(report, "# version: {}", p.version);
    let _ = writeln!(
        report,
        "deliver-demo: K={k} N={n} M={m} t={} N_E={n_e} L={l} F={} bits",
        assignment.t,
        library.file_bits()
    );
    let _ = writeln!(report, "demand: {demand:?}");
    let _ = writeln!(
        report,
        "codeword: {} blocks, {} bits (transmission-length formula: {formula_bits} bits)",
        codeword.blocks.len(),
        codeword.total_bits
    );
    let _ = writeln!(
        report,
        "mds: {n_e} blocks of {} bytes over {} ({})",
        blocks.block_bytes(),
        blocks.field_spec.field,
        blocks.field_spec.construction
    );

    let sets = subsets(n_e, l);
    let mut decoded_sets = 0;
    let mut recovered = vec![true; k];
    for s in &sets {
        let chosen: Vec<(usize, Vec<u8>)> = s.iter().map(|&i| frames[i].clone()).collect();
        let ok = mds_decode(&chosen, l, n_e, codeword.total_bits)
            .and_then(|bytes| MulticastCodeword::from_bytes(k, assignment.t, &bytes))
            .map(|cw| {
                let mut all = true;
                for u in 0..k {
                    let good = recover_file(u, &cw, &assignment, &demand)
                        .map(|f| f == library.file(demand[u]))
                        .unwrap_or(false);
                    recovered[u] &= good;
                    all &= good;
                }
                all
            })
            .unwrap_or(false);
        if ok {
            decoded_sets += 1;
        } else {
            let _ = writeln!(report, "subset {s:?}: FAILED");
        }
    }
    for (u, ok) in recovered.iter().enumerate() {
        let _ = writeln!(
            report,
            "user {u}: file {} {}",
            demand[u],
            if *ok { "recovered" } else { "NOT recovered" }
        );
    }
    let users_ok = recovered.iter().filter(|&&r| r).count();
    let length_ok = codeword.total_bits == formula_bits;
    let users_line = if users_ok == k {
        format!("all {k} users recovered files")
    } else {
        format!("{users_ok}/{k} users recovered files")
    };
    let _ = writeln!(report, "{users_line}");
    let _ = writeln!(report, "{decoded_sets}/{} MDS subsets decode", sets.len());
    let _ = writeln!(
        report,
        "codeword length {} formula",
        if length_ok { "matches" } else { "does NOT match" }
    );
    out.write_text("deliver_demo.txt", &report)?;
    let body: String = report.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    if users_ok != k || decoded_sets != sets.len() || !length_ok {
        println!("{body}");
        return Err(CliError::Validation("delivery round trip failed".into()));
    }
    Ok(body)
}
