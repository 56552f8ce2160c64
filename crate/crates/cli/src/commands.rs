use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use witness_tda::classify::{distances_to_model, roc_from_distances};
use witness_tda::embed::select_landmarks_with;
use witness_tda::filtration::epsilon_max_rule;
use witness_tda::ingest::write_wav_pcm16;
use witness_tda::{
    build_filtration, cech_complex, delay_embed, distances, persistence, read_csv, read_wav, suggest_tau, synthesize,
    train_fft, train_prf, windows, ClassifierModel, DelayParams, FilteredSimplex, MembershipModel, PipelineConfig,
    PointCloud, TimeSeries, ToneSpec, WindowSpec,
};

use crate::args::*;
use crate::svg::diagram_svg;

/// Failure of a command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(witness_tda::Error),
    Output(PathBuf, io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(e) => match e.root() {
                witness_tda::Error::Integrity(_) => 3,
                _ => 2,
            },
            CliError::Output(..) => 2,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self.exit_code() {
            1 => "usage",
            3 => "internal",
            _ => "data",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Data(e) => write!(f, "{e}"),
            CliError::Output(p, e) => write!(f, "cannot write {}: {e}", p.display()),
        }
    }
}

impl From<witness_tda::Error> for CliError {
    fn from(e: witness_tda::Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Persist(a) => persist(a),
        Command::Bench(a) => bench(a),
        Command::Synth(a) => synth(a),
        Command::Embed(a) => embed(a),
        Command::Train(a) => train(a),
        Command::Classify(a) => classify(a),
        Command::Roc(a) => roc(a),
    }
}

fn load_series(path: &Path, rate: Option<f64>, skip: f64) -> CliResult<TimeSeries> {
    let is_wav = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    let ts = if is_wav {
        let ts = read_wav(path)?;
        if let Some(r) = rate {
            if r != ts.rate() {
                return Err(CliError::Usage(format!(
                    "--rate {r} disagrees with the {} Hz rate of {}",
                    ts.rate(),
                    path.display()
                )));
            }
        }
        ts
    } else {
        let rate =
            rate.ok_or_else(|| CliError::Usage(format!("--rate is required for non-WAV input {}", path.display())))?;
        read_csv(path, rate)?
    };
    if skip < 0.0 || !skip.is_finite() {
        return Err(CliError::Usage(format!(
            "--skip-seconds must be nonnegative, got {skip}"
        )));
    }
    Ok(if skip > 0.0 { ts.skip_seconds(skip)? } else { ts })
}

fn delay_params(d: &DelayArgs, rate: f64) -> CliResult<DelayParams> {
    let tau = match (d.tau, d.freq) {
        (Some(t), None) => t,
        (None, Some(f)) => suggest_tau(rate, f)?,
        _ => return Err(CliError::Usage("exactly one of --freq or --tau is required".into())),
    };
    Ok(DelayParams::new(tau, d.dim)?)
}

fn pipeline_config(p: &PipelineArgs, delay: DelayParams) -> PipelineConfig {
    let mut c = PipelineConfig::new(delay, p.landmarks);
    c.strategy = p.landmark_strategy;
    c.resolution = p.grid;
    c.eps_max = p.eps_max;
    c.max_witnesses = p.witnesses;
    c.stop_dim = p.stop_dim;
    c
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(dir.to_path_buf(), e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> CliResult<()> {
    let wrap = |e| CliError::Output(path.to_path_buf(), e);
    let mut out = BufWriter::new(File::create(path).map_err(wrap)?);
    f(&mut out).and_then(|_| out.flush()).map_err(wrap)
}

fn first_window(ts: &TimeSeries, seconds: f64) -> CliResult<TimeSeries> {
    let mut w = windows(ts, &WindowSpec::disjoint(seconds, 1))?;
    Ok(w.remove(0))
}

fn persist(a: PersistArgs) -> CliResult<()> {
    let ts = load_series(&a.input.input, a.input.rate, a.input.skip_seconds)?;
    let delay = delay_params(&a.delay, ts.rate())?;
    let mut config = pipeline_config(&a.pipeline, delay);
    config.max_dim = a.max_dim;
    let window = first_window(&ts, a.window_sec)?;
    let d = config.distance_matrix(&window)?;
    let eps_max = config.window_eps_max(&d);
    let f = build_filtration(&d, config.max_dim, eps_max)?;
    let dgm = persistence(&f, config.max_dim - 1)?;

    create_dir(&a.out_dir)?;
    write_file(&a.out_dir.join("diagram.csv"), |out| dgm.write_csv(out, a.keep_zero))?;
    write_file(&a.out_dir.join("diagram.svg"), |out| {
        out.write_all(diagram_svg(&dgm, a.keep_zero).as_bytes())
    })?;
    if a.write_filtration {
        write_file(&a.out_dir.join("filtration.csv"), |out| f.write_csv(out))?;
    }

    println!(
        "tau={} dim={} witnesses={} landmarks={} eps_max={eps_max}",
        delay.tau,
        delay.dim,
        d.witnesses(),
        d.landmarks()
    );
    println!("filtration: {} simplices", f.len());
    for k in 0..config.max_dim {
        let lifetimes = dgm.lifetimes(k);
        let essential = dgm.in_dim(k).filter(|p| p.is_essential()).count();
        let top: Vec<String> = lifetimes.iter().take(3).map(|l| format!("{l:.4}")).collect();
        println!(
            "H{k}: {} classes ({essential} essential), longest [{}]",
            lifetimes.len(),
            top.join(", ")
        );
    }
    Ok(())
}

struct BenchRow {
    complex: &'static str,
    landmarks: usize,
    vertices: usize,
    edges: usize,
    triangles: usize,
    seconds: f64,
    bytes: usize,
}

fn bench_cloud(a: &BenchArgs) -> CliResult<PointCloud> {
    if let Some(path) = &a.cloud {
        return Ok(PointCloud::read_csv(path)?.truncated(a.points));
    }
    let path = a.input.as_ref().expect("clap requires --input or --cloud");
    let ts = load_series(path, a.rate, a.skip_seconds)?.peak_normalized();
    let delay = delay_params(&a.delay, ts.rate())?;
    Ok(delay_embed(&ts, delay)?.truncated(a.points))
}

fn bench(a: BenchArgs) -> CliResult<()> {
    let cloud = bench_cloud(&a)?;
    if a.landmarks.is_empty() || a.landmarks.contains(&0) {
        return Err(CliError::Usage("--landmarks needs positive counts".into()));
    }
    let mut rows = Vec::new();
    let mut eps_used = a.eps.unwrap_or(0.0);
    if !cloud.is_empty() {
        let eps = match a.eps {
            Some(e) => e,
            None => {
                let lm = select_landmarks_with(&cloud, a.rule_landmarks, Default::default())?;
                a.eps_factor * epsilon_max_rule(&distances(&cloud, &lm)?, a.stop_dim)
            }
        };
        eps_used = eps;
        let start = Instant::now();
        let cech = cech_complex(&cloud, eps, 2)?;
        let seconds = start.elapsed().as_secs_f64();
        rows.push(BenchRow {
            complex: "cech",
            landmarks: cloud.len(),
            vertices: cech.vertices,
            edges: cech.edges.len(),
            triangles: cech.triangles.len(),
            seconds,
            bytes: cech.vertices * std::mem::size_of::<u32>()
                + cech.edges.len() * std::mem::size_of::<[u32; 2]>()
                + cech.triangles.len() * std::mem::size_of::<[u32; 3]>(),
        });
        for &l in &a.landmarks {
            let start = Instant::now();
            let lm = select_landmarks_with(&cloud, l, Default::default())?;
            let f = build_filtration(&distances(&cloud, &lm)?, 2, eps)?;
            let seconds = start.elapsed().as_secs_f64();
            let counts = f.counts_at(eps);
            let count = |k: usize| counts.get(k).copied().unwrap_or(0);
            rows.push(BenchRow {
                complex: "witness",
                landmarks: l,
                vertices: count(0),
                edges: count(1),
                triangles: count(2),
                seconds,
                bytes: f.len() * std::mem::size_of::<FilteredSimplex>(),
            });
        }
    }

    create_dir(&a.out_dir)?;
    write_file(&a.out_dir.join("bench.csv"), |out| {
        writeln!(
            out,
            "complex,landmarks,points,eps,vertices,edges,triangles,seconds,est_bytes"
        )?;
        for r in &rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.complex,
                r.landmarks,
                cloud.len(),
                eps_used,
                r.vertices,
                r.edges,
                r.triangles,
                r.seconds,
                r.bytes
            )?;
        }
        Ok(())
    })?;

    println!("{} points, eps = {eps_used:.6}", cloud.len());
    println!(
        "{:<8} {:>9} {:>9} {:>10} {:>12} {:>10} {:>12}",
        "complex", "landmarks", "vertices", "edges", "triangles", "seconds", "est. bytes"
    );
    for r in &rows {
        println!(
            "{:<8} {:>9} {:>9} {:>10} {:>12} {:>10.4} {:>12}",
            r.complex, r.landmarks, r.vertices, r.edges, r.triangles, r.seconds, r.bytes
        );
    }
    Ok(())
}

fn synth(a: SynthArgs) -> CliResult<()> {
    if !(a.duration.is_finite() && a.duration > 0.0) {
        return Err(CliError::Usage(format!(
            "--duration must be positive, got {}",
            a.duration
        )));
    }
    let mut spec = ToneSpec::new(a.kind, a.freq, a.duration, a.rate).with_noise(a.noise, a.seed);
    spec.phase_seed = a.phase_seed;
    if let Some(p) = a.partials {
        spec.partials = p;
    }
    let ts = synthesize(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(dir) = a.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_wav_pcm16(&a.output, &ts)?;
    println!("wrote {} samples to {}", ts.len(), a.output.display());
    Ok(())
}

fn embed(a: EmbedArgs) -> CliResult<()> {
    let ts = load_series(&a.input.input, a.input.rate, a.input.skip_seconds)?;
    let delay = delay_params(&a.delay, ts.rate())?;
    let window = match a.window_sec {
        Some(s) => first_window(&ts, s)?,
        None => ts,
    };
    let cloud = delay_embed(&window.peak_normalized(), delay)?;
    create_dir(&a.out_dir)?;
    write_file(&a.out_dir.join("cloud.csv"), |out| cloud.write_csv(out))?;
    if let Some(l) = a.landmarks {
        let lm = select_landmarks_with(&cloud, l, a.landmark_strategy)?;
        let d = distances(&cloud, &lm)?;
        write_file(&a.out_dir.join("distances.csv"), |out| d.write_csv(out))?;
    }
    println!("tau={} dim={} points={}", delay.tau, delay.dim, cloud.len());
    Ok(())
}

fn train(a: TrainArgs) -> CliResult<()> {
    let ts = load_series(&a.input.input, a.input.rate, a.input.skip_seconds)?;
    let ws = windows(&ts, &WindowSpec::disjoint(a.window_sec, a.windows))?;
    let model = match a.model {
        ModelKind::Prf => {
            let delay = delay_params(&a.delay, ts.rate())?;
            ClassifierModel::Prf(train_prf(&ws, &pipeline_config(&a.pipeline, delay))?)
        }
        ModelKind::Fft => ClassifierModel::Fft(train_fft(&ws, a.taper)?),
    };
    create_dir(&a.out_dir)?;
    let path = a.out_dir.join("model.txt");
    model.save(&path)?;
    if let ClassifierModel::Prf(m) = &model {
        write_file(&a.out_dir.join("mean_prf.csv"), |out| m.mean.write_csv(out))?;
        println!("eps_max={}", m.eps_max());
    }
    println!(
        "{} model from {} windows of {} samples: sigma={}",
        model.kind(),
        ws.len(),
        model.window_len(),
        MembershipModel::sigma(&model)
    );
    Ok(())
}

fn model_windows(
    model: &ClassifierModel,
    path: &Path,
    rate: Option<f64>,
    skip: f64,
    count: usize,
) -> CliResult<Vec<TimeSeries>> {
    let ts = load_series(path, rate.or(Some(model.rate())), skip)?;
    if ts.rate() != model.rate() {
        return Err(CliError::Usage(format!(
            "{} is sampled at {} Hz, the model at {} Hz",
            path.display(),
            ts.rate(),
            model.rate()
        )));
    }
    let seconds = model.window_len() as f64 / model.rate();
    let ws = windows(&ts, &WindowSpec::disjoint(seconds, count))?;
    // Window lengths follow from floor(seconds·rate); guard against drift.
    if ws.iter().any(|w| w.len() != model.window_len()) {
        return Err(CliError::Usage("cannot cut windows matching the model length".into()));
    }
    Ok(ws)
}

fn classify(a: ClassifyArgs) -> CliResult<()> {
    let model = ClassifierModel::load(&a.model)?;
    let ws = model_windows(&model, &a.input.input, a.input.rate, a.input.skip_seconds, a.windows)?;
    let dists = distances_to_model(&model, &ws)?;
    let sigma = MembershipModel::sigma(&model);
    create_dir(&a.out_dir)?;
    let mut accepted = 0;
    write_file(&a.out_dir.join("classify.csv"), |out| {
        writeln!(out, "window,distance,accepted")?;
        for (i, d) in dists.iter().enumerate() {
            let yes = *d < a.k * sigma;
            accepted += usize::from(yes);
            writeln!(out, "{i},{d},{}", u8::from(yes))?;
        }
        Ok(())
    })?;
    println!("{accepted} of {} windows accepted at k={}", dists.len(), a.k);
    Ok(())
}

fn roc(a: RocArgs) -> CliResult<()> {
    let model = ClassifierModel::load(&a.model)?;
    let pos = model_windows(&model, &a.positive, a.rate, a.skip_seconds, a.windows)?;
    let neg = model_windows(&model, &a.negative, a.rate, a.skip_seconds, a.windows)?;
    let sigma = MembershipModel::sigma(&model);
    let curve = roc_from_distances(
        sigma,
        &distances_to_model(&model, &pos)?,
        &distances_to_model(&model, &neg)?,
        &a.k_grid.0,
    )?;
    create_dir(&a.out_dir)?;
    write_file(&a.out_dir.join("roc.csv"), |out| curve.write_csv(out))?;
    let best = curve
        .points
        .iter()
        .max_by(|x, y| (x.tpr - x.fpr).total_cmp(&(y.tpr - y.fpr)))
        .expect("k grid is nonempty");
    println!(
        "{} points; best separation at k={}: tpr={} fpr={}",
        curve.points.len(),
        best.k,
        best.tpr,
        best.fpr
    );
    Ok(())
}
