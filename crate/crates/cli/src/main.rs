use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use permuton::analytics::{
    classify_region, common_refinement, sample_from_permuton, star, AnalyticPermuton, BoundaryPair,
};
use permuton::experiments::{
    bubble_shape, rectangle_dims, round_json, run_experiment, sig12, slope_coxeter_path, ExperimentConfig,
    EXPERIMENTS,
};
use permuton::hecke::{demazure_of_word, demazure_product, fold_word, height_grid, random_permutation};
use permuton::pipedream::{apply_shape, render_svg, resolve, CompletedShape, RenderTarget, SvgOptions};
use permuton::rng::{self, DEFAULT_SEED};
use permuton::shapes::{
    bipartite_coxeter_word, coxeter_path, rectangle_paths, shape_from_paths, standard_coxeter_word,
};
use permuton::tasep::{c_p, q_p, r_p, v_p, GeomParam, TasepState};
use permuton::{BoundaryFunction, HeightGrid, LatticePath, Permutation, PipeDream, Shape, Word};

/// Demazure products, random pipe dreams, geometric-jump TASEP and limiting
/// permutons.
///
/// File formats (JSON):
///   shape       {"n": N, "sw": {"start": [x, y], "steps": "SSEE.."}, "ne": {..}}
///               or {"n": N, "boxes": [[x, y], ..]}
///   pipe dream  {"shape": <shape>, "tiles": [[x, y, "C"|"B"|"G"], ..]}
///   grid        {"n": N, "counts": [[..], ..]} with an optional "denom"
///   permuton    {"kind": "uniform"|"identity"|"anti-diagonal"|"grid-backed"|
///               "pipedream-limit"|"bubble-nu"|"star-product", "params": {..}}
///   experiment  any subset of the experiment config fields
///
/// Exit status: 0 on success, 1 on argument errors, 2 on I/O errors.
#[derive(Parser, Debug)]
#[command(name = "permuton", version, verbatim_doc_comment)]
struct Cli {
    /// Master seed; falls back to PERMUTON_SEED, then a fixed default.
    #[arg(long, global = true, env = "PERMUTON_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads for parallel work (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Demazure product of a word, or of two permutations.
    Demazure(DemazureArgs),
    /// Sample the Demazure product of a random subword of a shape.
    Sample(SampleArgs),
    /// Height grid of a permutation as JSON.
    Height(HeightArgs),
    /// Min-plus product of two height grids.
    Star(StarArgs),
    /// Evaluate, tabulate, classify or sample a limiting permuton.
    Analytic(AnalyticArgs),
    /// Run the geometric-jump TASEP or evaluate its limit formulas.
    Tasep(TasepArgs),
    /// Apply powers of a Coxeter element, or a rectangle of operators.
    Bubble(BubbleArgs),
    /// Run a named Monte Carlo experiment.
    Experiment(ExperimentArgs),
    /// Render a permutation plot or a pipe dream as SVG.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
struct DemazureArgs {
    /// Size of the permutations (required with --word).
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated letters in 1..n-1.
    #[arg(long, conflicts_with_all = ["u", "v"], requires = "n")]
    word: Option<String>,
    /// Left factor, e.g. 2143 or "2 1 4 3".
    #[arg(long, requires = "v")]
    u: Option<String>,
    /// Right factor.
    #[arg(long, requires = "u")]
    v: Option<String>,
    /// Starting permutation for --word (default identity).
    #[arg(long, requires = "word")]
    start: Option<String>,
}

#[derive(Args, Debug)]
#[group(id = "shape_source", required = true, multiple = false)]
struct ShapeSource {
    /// Shape JSON file.
    #[arg(long)]
    shape: Option<PathBuf>,
    /// Staircase shape of size N.
    #[arg(long)]
    staircase: Option<usize>,
    /// HEIGHT,WIDTH rectangle.
    #[arg(long)]
    rectangle: Option<String>,
}

impl ShapeSource {
    fn load(&self) -> CliResult<Shape> {
        if let Some(path) = &self.shape {
            return read_json(path);
        }
        if let Some(n) = self.staircase {
            if n < 1 {
                return Err(CliError::Arg("staircase needs n >= 1".into()));
            }
            return Ok(shape_from_paths(&LatticePath::staircase_sw(n), &LatticePath::staircase_ne(n))?);
        }
        let spec = self.rectangle.as_deref().unwrap_or_default();
        let dims = parse_list::<usize>(spec, "rectangle")?;
        let [h, w] = dims[..] else { return Err(CliError::Arg("--rectangle takes HEIGHT,WIDTH".into())) };
        if h == 0 || w == 0 {
            return Err(CliError::Arg("rectangle sides must be positive".into()));
        }
        let (sw, ne) = rectangle_paths(h, w);
        Ok(shape_from_paths(&sw, &ne)?)
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    source: ShapeSource,
    /// Probability of keeping each letter, in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Number of independent samples, one per line.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Also write the (first) sampled pipe dream as JSON.
    #[arg(long)]
    pipedream_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(id = "perm_source", required = true, multiple = false)]
struct PermSource {
    /// Permutation, e.g. 2143 or "2 1 4 3".
    #[arg(long)]
    perm: Option<String>,
    /// File holding a permutation (first line).
    #[arg(long)]
    perm_file: Option<PathBuf>,
    /// The identity of size N.
    #[arg(long)]
    identity: Option<usize>,
}

impl PermSource {
    fn load(&self) -> CliResult<Permutation> {
        if let Some(s) = &self.perm {
            return Ok(s.parse()?);
        }
        if let Some(path) = &self.perm_file {
            let text = read_text(path)?;
            return Ok(text.lines().next().unwrap_or_default().parse()?);
        }
        match self.identity {
            Some(n) if n >= 1 => Ok(Permutation::identity(n)),
            _ => Err(CliError::Arg("identity needs n >= 1".into())),
        }
    }
}

#[derive(Args, Debug)]
struct HeightArgs {
    #[command(flatten)]
    source: PermSource,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StarArgs {
    /// Left grid JSON.
    #[arg(long)]
    a: PathBuf,
    /// Right grid JSON.
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Family {
    Uniform,
    Identity,
    AntiDiagonal,
    PipedreamLimit,
    BubbleNu,
    Grid,
}

#[derive(Args, Debug)]
struct AnalyticArgs {
    /// Permuton family; or give --spec.
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    family: Option<Family>,
    /// Permuton JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Lower boundary as z:theta breakpoints, e.g. 0:0,1:0.
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// Upper boundary as z:theta breakpoints.
    #[arg(long, allow_hyphen_values = true)]
    psi: Option<String>,
    /// Use the limit pair of rectangles with east fraction BETA.
    #[arg(long, conflicts_with_all = ["phi", "psi"])]
    peridot: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Height grid JSON (family grid).
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Turn the permuton by 180 degrees first.
    #[arg(long)]
    rotate: bool,
    /// Point X,Y; repeatable.
    #[arg(long, value_name = "X,Y")]
    eval: Vec<String>,
    /// Print x,y,H as CSV on an (N+1)x(N+1) grid.
    #[arg(long, value_name = "N")]
    table: Option<usize>,
    /// Print the region label at each --eval point (pipedream-limit only).
    #[arg(long)]
    classify: bool,
    /// Draw a random permutation of size K.
    #[arg(long, value_name = "K")]
    sample: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum LimitFn {
    C,
    Q,
    R,
    V,
}

#[derive(Args, Debug)]
struct TasepArgs {
    /// Evaluate a limit formula instead of simulating.
    #[arg(long, value_name = "FN")]
    eval: Option<LimitFn>,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// First argument of the formula (a for c, m otherwise).
    #[arg(long)]
    m: Option<f64>,
    /// Second argument of the formula (b for c, t otherwise).
    #[arg(long)]
    t: Option<f64>,
    /// Particles, started at 1..k.
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    steps: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Particles may not pass this position.
    #[arg(long)]
    barrier: Option<i64>,
    /// Trajectory CSV (trial,t,i,xi); stdout by default.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum CoxeterKind {
    Standard,
    Bipartite,
    Slope,
    Rectangle,
}

#[derive(Args, Debug)]
struct BubbleArgs {
    #[arg(long)]
    n: usize,
    /// Passes per site: floor(alpha n) applications.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Slope for --coxeter slope; east fraction for --coxeter rectangle.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = CoxeterKind::Standard)]
    coxeter: CoxeterKind,
    /// Start from this permutation instead of a uniform one.
    #[arg(long)]
    perm: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// One of: convergence, fluctuation, bubble, doppelganger, inversion,
    /// pattern, dory, composite, hydrodynamic.
    name: String,
    /// JSON overrides of the preset config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sizes; repeatable or comma-separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// JSON summary path (stdout by default).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-row CSV path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Permutation to plot.
    #[arg(long, conflicts_with_all = ["pipedream", "perm_file"])]
    perm: Option<String>,
    /// File holding the permutation to plot (first line).
    #[arg(long, conflicts_with = "pipedream")]
    perm_file: Option<PathBuf>,
    /// Pipe dream JSON to draw.
    #[arg(long, required_unless_present_any = ["perm", "perm_file"])]
    pipedream: Option<PathBuf>,
    /// Shade resolved crossings.
    #[arg(long, requires = "pipedream")]
    resolve: bool,
    #[arg(long)]
    no_color: bool,
    #[arg(long)]
    title: Option<String>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Arg(String),
    Io(String),
}

impl From<permuton::Error> for CliError {
    fn from(e: permuton::Error) -> Self {
        CliError::Arg(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Arg(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn json_text<T: serde::Serialize>(v: &T) -> String {
    let mut value = serde_json::to_value(v).expect("serializable");
    round_json(&mut value);
    let mut s = serde_json::to_string(&value).expect("serializable");
    s.push('\n');
    s
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| CliError::Arg(format!("bad {what} entry {t:?}"))))
        .collect()
}

fn parse_point(s: &str) -> CliResult<(f64, f64)> {
    match parse_list::<f64>(s, "point")?[..] {
        [x, y] => Ok((x, y)),
        _ => Err(CliError::Arg(format!("point {s:?} is not X,Y"))),
    }
}

fn need<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Arg(format!("missing --{flag}")))
}

fn cmd_demazure(a: &DemazureArgs) -> CliResult<String> {
    let w = if let Some(word) = &a.word {
        let n = need(a.n, "n")?;
        let letters = if word.trim().is_empty() { Vec::new() } else { parse_list::<u32>(word, "letter")? };
        let word = Word::new(n, letters)?;
        match &a.start {
            Some(s) => fold_word(&s.parse()?, &word)?,
            None => demazure_of_word(&word),
        }
    } else {
        let (u, v): (Permutation, Permutation) = (need(a.u.as_ref(), "u")?.parse()?, need(a.v.as_ref(), "v")?.parse()?);
        demazure_product(&u, &v)?
    };
    Ok(format!("{w}\n"))
}

fn cmd_sample(a: &SampleArgs, seed: u64) -> CliResult<String> {
    if a.count < 1 {
        return Err(CliError::Arg("count must be at least 1".into()));
    }
    let completed = CompletedShape::new(&a.source.load()?);
    let mut out = String::new();
    for i in 0..a.count {
        let mut r = rng::substream(seed, i as u64);
        let pd = completed.sample(a.p, &mut r)?;
        if i == 0 {
            if let Some(path) = &a.pipedream_out {
                emit(Some(path), &json_text(&pd))?;
            }
        }
        out.push_str(&format!("{}\n", resolve(&pd).exit_labels()));
    }
    Ok(out)
}

fn cmd_star(a: &StarArgs) -> CliResult<String> {
    let (ga, gb): (HeightGrid, HeightGrid) = (read_json(&a.a)?, read_json(&a.b)?);
    let (ga, gb) = common_refinement(&ga, &gb)?;
    Ok(json_text(&star(&ga, &gb)?))
}

fn analytic_permuton(a: &AnalyticArgs) -> CliResult<AnalyticPermuton> {
    let perm = if let Some(path) = &a.spec {
        read_json(path)?
    } else {
        match need(a.family, "family")? {
            Family::Uniform => AnalyticPermuton::Uniform,
            Family::Identity => AnalyticPermuton::Identity,
            Family::AntiDiagonal => AnalyticPermuton::AntiDiagonal,
            Family::Grid => AnalyticPermuton::GridBacked(read_json(need(a.grid.as_deref(), "grid")?)?),
            Family::BubbleNu => AnalyticPermuton::BubbleNu { alpha: need(a.alpha, "alpha")?, beta: need(a.beta, "beta")? },
            Family::PipedreamLimit => {
                let pair = match a.peridot {
                    Some(beta) => BoundaryPair::peridot(beta)?,
                    None => {
                        let phi: BoundaryFunction = need(a.phi.as_ref(), "phi")?.parse()?;
                        let psi: BoundaryFunction = need(a.psi.as_ref(), "psi")?.parse()?;
                        BoundaryPair::new(phi, psi)?
                    }
                };
                AnalyticPermuton::PipedreamLimit { pair, p: need(a.p, "p")? }
            }
        }
    };
    perm.validate()?;
    Ok(if a.rotate { perm.rotated() } else { perm })
}

fn cmd_analytic(a: &AnalyticArgs, seed: u64) -> CliResult<String> {
    let perm = analytic_permuton(a)?;
    let mut out = String::new();
    if let Some(k) = a.sample {
        out.push_str(&format!("{}\n", sample_from_permuton(&perm, k, seed)?));
    }
    if let Some(n) = a.table {
        if n < 1 {
            return Err(CliError::Arg("table needs N >= 1".into()));
        }
        out.push_str("x,y,H\n");
        for i in 0..=n {
            for j in 0..=n {
                let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
                out.push_str(&format!("{},{},{}\n", sig12(x), sig12(y), sig12(perm.height(x, y))));
            }
        }
    }
    let points = a.eval.iter().map(|s| parse_point(s)).collect::<CliResult<Vec<_>>>()?;
    if a.classify {
        let AnalyticPermuton::PipedreamLimit { pair, p } = &perm else {
            return Err(CliError::Arg("--classify needs a pipedream-limit permuton".into()));
        };
        for &(x, y) in &points {
            out.push_str(&format!("{}\n", classify_region(pair, *p, x, y).name()));
        }
    } else if points.len() == 1 {
        out.push_str(&format!("{}\n", sig12(perm.height(points[0].0, points[0].1))));
    } else if !points.is_empty() {
        out.push_str("x,y,H\n");
        for &(x, y) in &points {
            out.push_str(&format!("{},{},{}\n", sig12(x), sig12(y), sig12(perm.height(x, y))));
        }
    }
    if out.is_empty() {
        return Err(CliError::Arg("nothing to do: give --eval, --table or --sample".into()));
    }
    Ok(out)
}

fn cmd_tasep(a: &TasepArgs, seed: u64) -> CliResult<()> {
    if let Some(f) = a.eval {
        let (m, t) = (need(a.m, "m")?, need(a.t, "t")?);
        let v = match f {
            LimitFn::C => c_p(a.p, m, t)?,
            LimitFn::Q => q_p(a.p, m, t)?,
            LimitFn::R => r_p(a.p, m, t)?,
            LimitFn::V => v_p(a.p, m, t)?,
        };
        return emit(a.out.as_deref(), &format!("{}\n", sig12(v)));
    }
    let g = GeomParam::new(a.p)?;
    if a.k < 1 || a.trials < 1 {
        return Err(CliError::Arg("need k >= 1 and trials >= 1".into()));
    }
    let mut out = String::from("trial,t,i,xi\n");
    for trial in 0..a.trials {
        let mut r = rng::substream(seed, trial as u64);
        let mut s = TasepState::step_initial(a.k);
        for step in 0..=a.steps {
            if step > 0 {
                s.step(g, &mut r, a.barrier);
            }
            for (i, x) in s.positions().iter().enumerate() {
                out.push_str(&format!("{trial},{step},{},{x}\n", i + 1));
            }
        }
    }
    emit(a.out.as_deref(), &out)
}

fn cmd_bubble(a: &BubbleArgs, seed: u64) -> CliResult<String> {
    let n = a.n;
    if n < 2 {
        return Err(CliError::Arg("n must be at least 2".into()));
    }
    let shape = match a.coxeter {
        CoxeterKind::Standard => bubble_shape(&coxeter_path(&standard_coxeter_word(n))?, a.alpha)?,
        CoxeterKind::Bipartite => bubble_shape(&coxeter_path(&bipartite_coxeter_word(n))?, a.alpha)?,
        CoxeterKind::Slope => bubble_shape(&slope_coxeter_path(a.beta, n)?, a.alpha)?,
        CoxeterKind::Rectangle => {
            let (h, w) = rectangle_dims(a.beta, n)?;
            let (sw, ne) = rectangle_paths(h, w);
            shape_from_paths(&sw, &ne)?
        }
    };
    let v = match &a.perm {
        Some(s) => s.parse()?,
        None => random_permutation(n, &mut rng::seeded(seed)),
    };
    Ok(format!("{}\n", apply_shape(&v, &shape)?))
}

fn cmd_experiment(a: &ExperimentArgs, seed: u64) -> CliResult<()> {
    if !EXPERIMENTS.contains(&a.name.as_str()) {
        return Err(CliError::Arg(format!("unknown experiment {:?}; expected one of {}", a.name, EXPERIMENTS.join(", "))));
    }
    let mut value = serde_json::to_value(ExperimentConfig::preset(&a.name)?).expect("config serializes");
    value["seed"] = seed.into();
    if let Some(path) = &a.config {
        let overrides: serde_json::Value = read_json(path)?;
        let serde_json::Value::Object(map) = overrides else {
            return Err(CliError::Arg(format!("{}: config must be a JSON object", path.display())));
        };
        for (k, v) in map {
            value[k] = v;
        }
    }
    let mut cfg: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| CliError::Arg(format!("experiment config: {e}")))?;
    if !a.n.is_empty() {
        cfg.ns = a.n.clone();
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(p) = a.p {
        cfg.p = p;
    }
    let (summary, csv) = run_experiment(&a.name, &cfg)?;
    if let Some(path) = &a.csv {
        emit(Some(path), &csv)?;
    }
    let mut text = serde_json::to_string_pretty(&summary).expect("json");
    text.push('\n');
    emit(a.out.as_deref(), &text)
}

fn cmd_render(a: &RenderArgs) -> CliResult<String> {
    let mut opts = SvgOptions { color_pipes: !a.no_color, title: a.title.clone(), ..SvgOptions::default() };
    if let Some(s) = a.scale {
        if s.is_nan() || s <= 0.0 {
            return Err(CliError::Arg("scale must be positive".into()));
        }
        opts.scale = s;
    }
    let plotted = match (&a.perm, &a.perm_file) {
        (Some(s), _) => Some(s.parse::<Permutation>()?),
        (None, Some(path)) => Some(read_text(path)?.lines().next().unwrap_or_default().parse()?),
        _ => None,
    };
    if let Some(u) = plotted {
        if a.scale.is_none() {
            opts.scale = 400.0;
        }
        return Ok(render_svg(RenderTarget::Plot(&u), &opts));
    }
    let pd: PipeDream = read_json(need(a.pipedream.as_deref(), "pipedream")?)?;
    Ok(if a.resolve { render_svg(RenderTarget::Resolved(&resolve(&pd)), &opts) } else { render_svg(RenderTarget::PipeDream(&pd), &opts) })
}

fn run(cli: Cli) -> CliResult<()> {
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .map_err(|e| CliError::Arg(format!("workers: {e}")))?;
    }
    let seed = cli.seed;
    match &cli.command {
        Command::Demazure(a) => emit(None, &cmd_demazure(a)?),
        Command::Sample(a) => {
            let text = cmd_sample(a, seed)?;
            emit(a.out.as_deref(), &text)
        }
        Command::Height(a) => emit(a.out.as_deref(), &json_text(&height_grid(&a.source.load()?))),
        Command::Star(a) => {
            let text = cmd_star(a)?;
            emit(a.out.as_deref(), &text)
        }
        Command::Analytic(a) => emit(None, &cmd_analytic(a, seed)?),
        Command::Tasep(a) => cmd_tasep(a, seed),
        Command::Bubble(a) => {
            let text = cmd_bubble(a, seed)?;
            emit(a.out.as_deref(), &text)
        }
        Command::Experiment(a) => cmd_experiment(a, seed),
        Command::Render(a) => {
            let text = cmd_render(a)?;
            emit(a.out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let line = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("{}", line.trim());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Arg(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
