use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::data::{format_row, read_rows, write_atomic, DataFormat, DatasetManifest, Preprocessing};
use super::{Command, DataOpts, Distribution, EXIT_NO_CONVERGENCE, EXIT_OK};
use crate::bayes::{self, classify, density_estimate, Density, DpPrior, StickOptions};
use crate::error::{Error, Result};
use crate::frechet::{extrinsic_mean, intrinsic_mean, IntrinsicOptions, MeanMethod, Sample};
use crate::geometry::{embed, Manifold, Point};
use crate::inference::{
    bootstrap_two_sample, confidence_region_test, fdr_select, matched_pair_test, two_sample_extrinsic,
    two_sample_intrinsic, InferenceOptions, TestReport,
};

pub(super) fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Mean { data, data_opts, method, max_iter, out } => {
            let s = Sample::new(dataset(&data, &data_opts)?.load()?)?;
            let est = match MeanMethod::from(method) {
                MeanMethod::Extrinsic => extrinsic_mean(&s)?,
                MeanMethod::Intrinsic => intrinsic_mean(&s, &IntrinsicOptions { max_iter, ..Default::default() })?,
            };
            for w in &est.warnings {
                eprintln!("warning: {w}");
            }
            emit_json(out.as_deref(), &est)?;
            Ok(if est.converged { EXIT_OK } else { EXIT_NO_CONVERGENCE })
        }
        Command::Test2 { first, second, data_opts, method, alpha, bootstrap, seed, ridge, out } => {
            let a = dataset(&first, &data_opts)?;
            let b = dataset(&second, &data_opts)?;
            if a.manifold()? != b.manifold()? {
                return Err(Error::ManifoldMismatch(a.manifold()?, b.manifold()?));
            }
            let (s1, s2) = (Sample::new(a.load()?)?, Sample::new(b.load()?)?);
            let opts = InferenceOptions { alpha, ridge, basis_rotation: None };
            let report = match (MeanMethod::from(method), bootstrap) {
                (MeanMethod::Extrinsic, None) => two_sample_extrinsic(&s1, &s2, &opts)?,
                (MeanMethod::Extrinsic, Some(reps)) => bootstrap_two_sample(&s1, &s2, reps, seed, &opts)?,
                (MeanMethod::Intrinsic, None) => two_sample_intrinsic(&s1, &s2, &opts)?,
                (MeanMethod::Intrinsic, Some(_)) => {
                    return Err(Error::InvalidArgument("--bootstrap is available for the extrinsic test only".into()))
                }
            };
            summarize(&report);
            emit_json(out.as_deref(), &report)?;
            Ok(EXIT_OK)
        }
        Command::Matchpair { data, data_opts, alpha, ridge, out } => {
            let manifest = dataset(&data, &data_opts)?;
            let manifold = manifest.manifold()?;
            let half = manifest.row_len()?;
            let rows = read_rows(&manifest.data_path, 0)?;
            let mut pairs = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                if row.len() != 2 * half {
                    return Err(Error::Parse(format!(
                        "{}, row {}: a pair needs {} values, found {}",
                        manifest.data_path.display(),
                        i + 1,
                        2 * half,
                        row.len()
                    )));
                }
                let a = manifest.point_from_row(manifold, &row[..half]);
                let b = manifest.point_from_row(manifold, &row[half..]);
                let wrap = |e: Error| Error::Parse(format!("{}, row {}: {e}", manifest.data_path.display(), i + 1));
                pairs.push((a.map_err(wrap)?, b.map_err(wrap)?));
            }
            let report = matched_pair_test(&pairs, &InferenceOptions { alpha, ridge, basis_rotation: None })?;
            summarize(&report);
            emit_json(out.as_deref(), &report)?;
            Ok(EXIT_OK)
        }
        Command::Region { data, data_opts, candidate, method, alpha, ridge, out } => {
            let manifest = dataset(&data, &data_opts)?;
            let s = Sample::new(manifest.load()?)?;
            let candidate = Point::from_flat(s.manifold(), &parse_list(&candidate, "--candidate")?)?;
            let opts = InferenceOptions { alpha, ridge, basis_rotation: None };
            let report = confidence_region_test(&s, &candidate, method.into(), &opts)?;
            summarize(&report);
            emit_json(out.as_deref(), &report)?;
            Ok(EXIT_OK)
        }
        Command::Classify { train, test, data_opts, priors, concentration, draws, seed, out } => {
            let table = classify_table(&train, &test, &data_opts, &priors, concentration, draws, seed)?;
            emit(out.as_deref(), table.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::BayesFit { data, data_opts, concentration, draws, seed, out } => {
            let manifest = dataset(&data, &data_opts)?;
            let prior = DpPrior::new(manifest.manifold()?, concentration)?;
            let fit = density_estimate(&prior, &manifest.load()?, draws, seed, &StickOptions::default())?;
            emit_json(out.as_deref(), &fit)?;
            Ok(EXIT_OK)
        }
        Command::Simulate { dist, manifold, n, tau, mu, seed, out } => {
            simulate(dist, &manifold, n, tau, mu.as_deref(), seed, &out)?;
            Ok(EXIT_OK)
        }
        Command::Fdr { pvalues, alpha, out } => {
            let p: Vec<f64> = read_rows(&pvalues, 0)?.into_iter().flatten().collect();
            let selected = fdr_select(&p, alpha)?;
            let text: String = selected.iter().map(|i| format!("{i}\n")).collect();
            emit(out.as_deref(), text.as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

fn dataset(path: &Path, opts: &DataOpts) -> Result<DatasetManifest> {
    if path.extension().is_some_and(|e| e == "json") {
        return DatasetManifest::read(path);
    }
    let manifold = opts.manifold.clone().ok_or_else(|| {
        Error::InvalidArgument(format!("{} is not a manifest; pass --manifold to describe it", path.display()))
    })?;
    let format = opts.format.unwrap_or(if manifold.starts_with("spd") { DataFormat::SpdCsv } else { DataFormat::FlatCsv });
    Ok(DatasetManifest {
        manifold,
        data_path: path.to_path_buf(),
        format,
        preprocessing: opts.preprocess.unwrap_or_default(),
    })
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidArgument(format!("{what}: {e}")))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, text.as_bytes())
}

fn summarize(r: &TestReport) {
    eprintln!(
        "{:?}: statistic {:.4} on {} dof, p = {:.4e}{}; {} at alpha = {}",
        r.method,
        r.statistic,
        r.dof,
        r.p_value,
        r.bootstrap.as_ref().map_or(String::new(), |b| format!(
            ", bootstrap p = {:.4} from {} replicates",
            b.p_value_boot, b.replications
        )),
        if r.reject { "reject" } else { "do not reject" },
        r.alpha
    );
}

fn split_pair<'a>(text: &'a str, what: &str) -> Result<(&'a str, &'a str)> {
    text.split_once('=')
        .filter(|(l, r)| !l.is_empty() && !r.is_empty())
        .ok_or_else(|| Error::InvalidArgument(format!("{what} expects LABEL=VALUE, got '{text}'")))
}

fn classify_table(
    train: &[String],
    test: &Path,
    opts: &DataOpts,
    priors: &[String],
    concentration: f64,
    draws: usize,
    seed: u64,
) -> Result<String> {
    if train.len() < 2 {
        return Err(Error::InvalidArgument("classification needs at least two --train classes".into()));
    }
    let mut labels = Vec::new();
    let mut densities = Vec::new();
    let mut means = Vec::new();
    let mut manifold: Option<Manifold> = None;
    for spec in train {
        let (label, path) = split_pair(spec, "--train")?;
        if labels.iter().any(|l| l == label) {
            return Err(Error::InvalidArgument(format!("class '{label}' given twice")));
        }
        let manifest = dataset(&PathBuf::from(path), opts)?;
        let m = manifest.manifold()?;
        if let Some(prev) = manifold {
            prev.check_same(&m)?;
        }
        manifold = Some(m);
        let points = manifest.load()?;
        means.push(extrinsic_mean(&Sample::new(points.clone())?)?.mean);
        // every class uses the same seed, so identical training sets give identical densities
        densities.push(density_estimate(&DpPrior::new(m, concentration)?, &points, draws, seed, &StickOptions::default())?);
        labels.push(label.to_string());
    }
    let manifold = manifold.expect("at least two classes");

    let mut prior_probs = vec![1.0 / labels.len() as f64; labels.len()];
    if !priors.is_empty() {
        let given: BTreeMap<&str, f64> = priors
            .iter()
            .map(|p| {
                let (l, v) = split_pair(p, "--prior")?;
                Ok((l, v.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("--prior {p}: {e}")))?))
            })
            .collect::<Result<_>>()?;
        for (i, label) in labels.iter().enumerate() {
            prior_probs[i] = *given
                .get(label.as_str())
                .ok_or_else(|| Error::InvalidArgument(format!("no --prior for class '{label}'")))?;
        }
        if given.len() != labels.len() {
            return Err(Error::InvalidArgument("--prior names a class without training data".into()));
        }
    }

    let test_manifest = dataset(test, opts)?;
    manifold.check_same(&test_manifest.manifold()?)?;
    let groups: Vec<(f64, &dyn Density)> =
        prior_probs.iter().zip(&densities).map(|(&p, d)| (p, d as &dyn Density)).collect();

    let mut out = String::from("row_id,label");
    for l in &labels {
        out += &format!(",posterior_{l}");
    }
    for l in &labels {
        out += &format!(",dist_{l}");
    }
    out += ",ties\n";
    for (i, x) in test_manifest.load()?.iter().enumerate() {
        let c = classify(x, &groups)?;
        let dists: Vec<f64> = means.iter().map(|m| extrinsic_distance(x, m)).collect();
        let ties = if c.is_tie() {
            c.ties.iter().map(|&t| labels[t].as_str()).collect::<Vec<_>>().join("|")
        } else {
            String::new()
        };
        out += &format!("{},{},{},{},{}\n", i + 1, labels[c.label], format_row(&c.posterior), format_row(&dists), ties);
    }
    Ok(out)
}

/// Chord distance between embedded images.
fn extrinsic_distance(a: &Point, b: &Point) -> f64 {
    embed(a).ambient.sub(&embed(b).ambient).norm()
}

fn simulate(
    dist: Distribution,
    key: &str,
    n: usize,
    tau: Option<f64>,
    mu: Option<&str>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("--n must be positive".into()));
    }
    if out.extension().is_some_and(|e| e == "json") {
        return Err(Error::InvalidArgument("--out names the data file; the manifest goes next to it as .json".into()));
    }
    let manifold: Manifold = key.parse()?;
    let centre = || -> Result<Point> {
        match mu {
            Some(text) => {
                // any nonzero direction; rescaled to unit length
                let flat = parse_list(text, "--mu")?;
                let norm = flat.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(norm > 0.0 && norm.is_finite()) || matches!(manifold, Manifold::Spd { .. }) {
                    return Point::from_flat(manifold, &flat);
                }
                Point::from_flat(manifold, &flat.iter().map(|v| v / norm).collect::<Vec<_>>())
            }
            None => {
                let mut flat = vec![0.0; manifold.flat_len()];
                flat[0] = 1.0;
                Point::from_flat(manifold, &flat)
            }
        }
    };
    let need_tau = || tau.ok_or_else(|| Error::InvalidArgument(format!("--tau is required for {dist:?}")));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Point> = match (dist, manifold) {
        (Distribution::Vmf, Manifold::Sphere { .. }) => {
            bayes::sampling::sample_vmf_concentrated(&centre()?, need_tau()?, n, &mut rng)?.points().to_vec()
        }
        (Distribution::Watson, Manifold::PlanarShape { .. }) => {
            bayes::sampling::sample_watson_concentrated(&centre()?, need_tau()?, n, &mut rng)?.points().to_vec()
        }
        (Distribution::Uniform, _) => {
            (0..n).map(|_| bayes::sample_uniform(manifold, &mut rng)).collect::<Result<_>>()?
        }
        (d, m) => return Err(Error::InvalidArgument(format!("{d:?} draws are not available on {m}"))),
    };
    let mut text = String::new();
    for p in &points {
        text += &format_row(&p.to_flat());
        text.push('\n');
    }
    write_atomic(out, text.as_bytes())?;

    let name = out.file_name().map(PathBuf::from).unwrap_or_default();
    let manifest = DatasetManifest {
        manifold: manifold.to_string(),
        data_path: name,
        format: if matches!(manifold, Manifold::Spd { .. }) { DataFormat::SpdCsv } else { DataFormat::FlatCsv },
        preprocessing: Preprocessing::None,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    write_atomic(&out.with_extension("json"), json.as_bytes())
}
