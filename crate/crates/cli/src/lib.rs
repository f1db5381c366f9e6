//! `edgecraft` command-line front end.
//!
//! Every subcommand validates its parameters, then computes all artifacts in
//! memory, then writes them. A failing run therefore leaves no partial
//! outputs behind.

pub mod params;
pub mod pipeline;
pub mod records;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use edgecraft_core::canny::canny;
use edgecraft_core::ght::{
    build_rtable_with, edge_centroid, ght_accumulate, locate_shape, phase_field, PhaseMode, RTable,
};
use edgecraft_core::gradient::{first_order_gradient, laplacian};
use edgecraft_core::harris::{detect_corners, harris_response, structure_tensor, HarrisParams};
use edgecraft_core::hough::{
    decode_circles, decode_lines, find_peaks, hough_circle_accumulate, hough_line_accumulate,
    Accumulator2D, CircleSearch,
};
use edgecraft_core::{io, BorderPolicy, EdgeMap, FilterSpec, GhtParams, PixelCoord, RasterImage};

use params::{
    CannyArgs, CircleArgs, EdgeOperator, EdgesArgs, FilterArgs, GhtDetectArgs, HarrisArgs,
    LineArgs, LineSettings,
};
use pipeline::{PipelineConfig, StageConfig};
pub use records::{render_overlay, FeatureRecord};

/// Edge images are binarized at this level when read back from disk.
pub const EDGE_LEVEL: f64 = 0.5;

#[derive(Debug)]
pub enum Failure {
    /// Bad parameters or a malformed input; exit status 1.
    Invalid(String),
    /// Unreadable or unwritable files; exit status 2.
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "error: {m}"),
            Failure::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

fn invalid(e: impl fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "edgecraft",
    version,
    about = "Edge, corner, line, circle and shape detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ImageInOut {
    /// Input image (PGM or PNG).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output image; `.png` writes PNG, anything else binary PGM.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FeatureOut {
    /// Input image (PGM or PNG).
    #[arg(long = "in")]
    input: PathBuf,
    /// JSON-lines feature file; features go to stdout when absent.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Input image with features drawn on top.
    #[arg(long)]
    overlay: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Denoise or smooth an image.
    Filter {
        #[command(flatten)]
        files: ImageInOut,
        #[command(flatten)]
        args: FilterArgs,
    },
    /// Gradient magnitude or Laplacian, scaled by its peak.
    Edges {
        #[command(flatten)]
        files: ImageInOut,
        #[command(flatten)]
        args: EdgesArgs,
    },
    /// Canny edge map.
    Canny {
        #[command(flatten)]
        files: ImageInOut,
        #[command(flatten)]
        args: CannyArgs,
    },
    /// Harris corners.
    Harris {
        #[command(flatten)]
        files: FeatureOut,
        #[command(flatten)]
        args: HarrisArgs,
        /// Positive part of the response, scaled by its peak.
        #[arg(long)]
        response: Option<PathBuf>,
    },
    /// Straight lines from an edge image.
    HoughLine {
        #[command(flatten)]
        files: FeatureOut,
        #[command(flatten)]
        args: LineArgs,
        /// Accumulator dump (rows ρ, columns θ).
        #[arg(long)]
        accumulator: Option<PathBuf>,
    },
    /// Circles of known radius from an edge image.
    HoughCircle {
        #[command(flatten)]
        files: FeatureOut,
        #[command(flatten)]
        args: CircleArgs,
        /// Accumulator dump; needs exactly one radius.
        #[arg(long)]
        accumulator: Option<PathBuf>,
    },
    /// Build an R-table from a model image.
    GhtBuild {
        #[command(flatten)]
        files: ImageInOut,
        #[command(flatten)]
        canny: CannyArgs,
        #[arg(long, default_value_t = 64)]
        phi_bins: usize,
        /// Reference point `X,Y`; defaults to the edge centroid.
        #[arg(long, value_parser = parse_point)]
        reference: Option<PixelCoord>,
        /// Fold gradient phase into [0, π) so contrast polarity is ignored.
        #[arg(long)]
        half_turn: bool,
    },
    /// Locate a modelled shape in a scene image.
    GhtDetect {
        #[command(flatten)]
        files: FeatureOut,
        #[command(flatten)]
        canny: CannyArgs,
        #[command(flatten)]
        args: GhtDetectArgs,
        #[arg(long)]
        accumulator: Option<PathBuf>,
    },
    /// Run a TOML-described sequence of stages.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_point(s: &str) -> Result<PixelCoord, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected X,Y, found {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<i64>().map_err(|e| format!("{v:?}: {e}"));
    Ok(PixelCoord::new(parse(x)?, parse(y)?))
}

/// Files and stdout bytes produced by a command, written only once the
/// whole command has succeeded.
#[derive(Debug, Default)]
struct Artifacts {
    dirs: Vec<PathBuf>,
    files: Vec<(PathBuf, Vec<u8>)>,
    stdout: Vec<u8>,
}

impl Artifacts {
    fn image(&mut self, path: &Path, image: &RasterImage) -> Result<(), Failure> {
        let bytes = io::save_image(image, io::ImageFormat::from_path(path)).map_err(invalid)?;
        self.files.push((path.to_path_buf(), bytes));
        Ok(())
    }

    fn features(&mut self, path: Option<&Path>, records: &[FeatureRecord]) {
        let bytes = records::to_jsonl(records);
        match path {
            Some(p) => self.files.push((p.to_path_buf(), bytes)),
            None => self.stdout.extend(bytes),
        }
    }

    fn commit(self, stdout: &mut dyn Write) -> Result<(), Failure> {
        for d in &self.dirs {
            std::fs::create_dir_all(d).map_err(|e| Failure::Io(format!("{}: {e}", d.display())))?;
        }
        for (path, bytes) in &self.files {
            std::fs::write(path, bytes)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        }
        stdout
            .write_all(&self.stdout)
            .map_err(|e| Failure::Io(e.to_string()))
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<RasterImage, Failure> {
    let bytes = read_file(path)?;
    io::load_image(&bytes, io::ImageFormat::from_path(path))
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_rtable(path: &Path) -> Result<RTable, Failure> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    RTable::from_text(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

// Stage kernels shared by the subcommands and the pipeline.

fn edge_image(
    image: &RasterImage,
    op: EdgeOperator,
    policy: BorderPolicy,
) -> Result<RasterImage, Failure> {
    let plane = match op {
        EdgeOperator::FirstOrder(kind) => {
            first_order_gradient(image, kind, policy)
                .map_err(invalid)?
                .magnitude
        }
        EdgeOperator::Laplacian(conn) => laplacian(image, conn, policy).map_err(invalid)?,
    };
    Ok(plane.to_normalized_image())
}

fn harris_stage(
    image: &RasterImage,
    params: &HarrisParams,
) -> Result<(RasterImage, Vec<FeatureRecord>), Failure> {
    let field = first_order_gradient(
        image,
        edgecraft_core::FirstOrderKind::Sobel,
        BorderPolicy::Replicate,
    )
    .map_err(invalid)?;
    let tensor = structure_tensor(&field, params.window_sigma).map_err(invalid)?;
    let response = harris_response(&tensor, params.k).map_err(invalid)?;
    let corners = detect_corners(&response, params).map_err(invalid)?;
    let records = corners
        .iter()
        .map(|c| FeatureRecord::Corner {
            x: c.coord.x,
            y: c.coord.y,
            response: c.response,
        })
        .collect();
    Ok((response.map(|v| v.max(0.0)).to_normalized_image(), records))
}

fn line_stage(
    edges: &EdgeMap,
    s: &LineSettings,
) -> Result<(Accumulator2D, Vec<FeatureRecord>), Failure> {
    let acc = hough_line_accumulate(edges, s.theta_bins, s.rho_step).map_err(invalid)?;
    let mut peaks = find_peaks(&acc, s.threshold.resolve(&acc), s.nms_radius);
    if acc.max() == 0 {
        peaks.clear();
    }
    if let Some(n) = s.max_lines {
        peaks.truncate(n);
    }
    let records = decode_lines(&peaks, &acc)
        .into_iter()
        .zip(&peaks)
        .map(|(l, p)| FeatureRecord::Line {
            rho: l.rho,
            theta: l.theta,
            votes: p.votes,
        })
        .collect();
    Ok((acc, records))
}

fn circle_stage(
    edges: &EdgeMap,
    search: &CircleSearch,
    max_circles: Option<usize>,
) -> Result<(Vec<Accumulator2D>, Vec<FeatureRecord>), Failure> {
    let mut accs = Vec::new();
    let mut records = Vec::new();
    for &r in &search.radii {
        let acc = hough_circle_accumulate(edges, r, search.theta_steps).map_err(invalid)?;
        if acc.max() > 0 {
            let peaks = find_peaks(&acc, search.threshold.resolve(&acc), search.nms_radius);
            for (c, p) in decode_circles(&peaks, &acc, r).into_iter().zip(&peaks) {
                records.push(FeatureRecord::Circle {
                    a: c.a,
                    b: c.b,
                    r: c.r,
                    votes: p.votes,
                });
            }
        }
        accs.push(acc);
    }
    // Stable: equal votes keep radius order.
    records.sort_by_key(|r| std::cmp::Reverse(votes(r)));
    if let Some(n) = max_circles {
        records.truncate(n);
    }
    Ok((accs, records))
}

fn votes(r: &FeatureRecord) -> u64 {
    match *r {
        FeatureRecord::Corner { .. } => 0,
        FeatureRecord::Line { votes, .. }
        | FeatureRecord::Circle { votes, .. }
        | FeatureRecord::ShapeInstance { votes, .. } => votes,
    }
}

fn ght_stage(
    edges: &EdgeMap,
    phase_source: &RasterImage,
    table: &RTable,
    params: &GhtParams,
) -> Result<(Accumulator2D, Vec<FeatureRecord>), Failure> {
    let phase = phase_field(phase_source).map_err(invalid)?;
    let acc = ght_accumulate(edges, &phase, table).map_err(invalid)?;
    let found = if acc.max() == 0 {
        Vec::new()
    } else {
        locate_shape(&acc, params).map_err(invalid)?
    };
    let records = found
        .into_iter()
        .map(|(p, votes)| FeatureRecord::ShapeInstance {
            x: p.x,
            y: p.y,
            votes,
        })
        .collect();
    Ok((acc, records))
}

fn emit_features(
    artifacts: &mut Artifacts,
    files: &FeatureOut,
    base: &RasterImage,
    records: &[FeatureRecord],
) -> Result<(), Failure> {
    artifacts.features(files.features.as_deref(), records);
    if let Some(path) = &files.overlay {
        artifacts.image(path, &render_overlay(base, records))?;
    }
    Ok(())
}

fn execute(command: Command) -> Result<Artifacts, Failure> {
    let mut out = Artifacts::default();
    match command {
        Command::Filter { files, args } => {
            let spec: FilterSpec = args.spec().map_err(Failure::Invalid)?;
            let image = load(&files.input)?;
            out.image(&files.out, &spec.apply(&image).map_err(invalid)?)?;
        }
        Command::Edges { files, args } => {
            let image = load(&files.input)?;
            out.image(
                &files.out,
                &edge_image(&image, args.operator(), args.border.into())?,
            )?;
        }
        Command::Canny { files, args } => {
            let params = args.params().map_err(Failure::Invalid)?;
            let image = load(&files.input)?;
            out.image(
                &files.out,
                &canny(&image, &params).map_err(invalid)?.to_image(),
            )?;
        }
        Command::Harris {
            files,
            args,
            response,
        } => {
            let params = args.params().map_err(Failure::Invalid)?;
            let image = load(&files.input)?;
            let (resp, records) = harris_stage(&image, &params)?;
            if let Some(path) = &response {
                out.image(path, &resp)?;
            }
            emit_features(&mut out, &files, &image, &records)?;
        }
        Command::HoughLine {
            files,
            args,
            accumulator,
        } => {
            let settings = args.settings().map_err(Failure::Invalid)?;
            let image = load(&files.input)?;
            let (acc, records) = line_stage(&EdgeMap::from_image(&image, EDGE_LEVEL), &settings)?;
            if let Some(path) = &accumulator {
                out.image(path, &acc.to_image())?;
            }
            emit_features(&mut out, &files, &image, &records)?;
        }
        Command::HoughCircle {
            files,
            args,
            accumulator,
        } => {
            let search = args.search().map_err(Failure::Invalid)?;
            if accumulator.is_some() && search.radii.len() != 1 {
                return Err(invalid("--accumulator needs exactly one --radius"));
            }
            let image = load(&files.input)?;
            let edges = EdgeMap::from_image(&image, EDGE_LEVEL);
            let (accs, records) = circle_stage(&edges, &search, args.max_circles)?;
            if let Some(path) = &accumulator {
                out.image(path, &accs[0].to_image())?;
            }
            emit_features(&mut out, &files, &image, &records)?;
        }
        Command::GhtBuild {
            files,
            canny: canny_args,
            phi_bins,
            reference,
            half_turn,
        } => {
            let params = canny_args.params().map_err(Failure::Invalid)?;
            if phi_bins < 4 {
                return Err(invalid(format!("phi_bins {phi_bins} must be at least 4")));
            }
            let image = load(&files.input)?;
            let edges = canny(&image, &params).map_err(invalid)?;
            let reference = match reference {
                Some(r) => r,
                None => edge_centroid(&edges).ok_or_else(|| invalid("model image has no edges"))?,
            };
            let mode = if half_turn {
                PhaseMode::HalfTurn
            } else {
                PhaseMode::FullTurn
            };
            let phase = phase_field(&image).map_err(invalid)?;
            let table =
                build_rtable_with(&edges, &phase, reference, phi_bins, mode).map_err(invalid)?;
            out.files.push((files.out, table.to_text().into_bytes()));
        }
        Command::GhtDetect {
            files,
            canny: canny_args,
            args,
            accumulator,
        } => {
            let params = canny_args.params().map_err(Failure::Invalid)?;
            let ght = args.params().map_err(Failure::Invalid)?;
            let table = load_rtable(args.model_path().map_err(Failure::Invalid)?)?;
            let image = load(&files.input)?;
            let edges = canny(&image, &params).map_err(invalid)?;
            let (acc, records) = ght_stage(&edges, &image, &table, &ght)?;
            if let Some(path) = &accumulator {
                out.image(path, &acc.to_image())?;
            }
            emit_features(&mut out, &files, &image, &records)?;
        }
        Command::Pipeline { config } => {
            let text = String::from_utf8(read_file(&config)?)
                .map_err(|e| invalid(format!("{}: {e}", config.display())))?;
            let config = PipelineConfig::from_toml(&text)
                .map_err(|e| invalid(format!("{}: {e}", config.display())))?;
            out = run_pipeline(&config)?;
        }
    }
    Ok(out)
}

/// A pipeline stage with its parameters already validated.
enum Planned {
    Filter(FilterSpec),
    Edges(EdgeOperator, BorderPolicy),
    Canny(edgecraft_core::CannyParams),
    Harris(HarrisParams),
    Lines(LineSettings),
    Circles(CircleSearch, Option<usize>),
    Ght(Box<RTable>, GhtParams),
}

fn plan(stage: &StageConfig, index: usize) -> Result<Planned, Failure> {
    let tag = |m: String| Failure::Invalid(format!("stage {} ({}): {m}", index + 1, stage.name()));
    Ok(match stage {
        StageConfig::Filter(a) => Planned::Filter(a.spec().map_err(tag)?),
        StageConfig::Edges(a) => Planned::Edges(a.operator(), a.border.into()),
        StageConfig::Canny(a) => Planned::Canny(a.params().map_err(tag)?),
        StageConfig::Harris(a) => Planned::Harris(a.params().map_err(tag)?),
        StageConfig::HoughLine(a) => Planned::Lines(a.settings().map_err(tag)?),
        StageConfig::HoughCircle(a) => Planned::Circles(a.search().map_err(tag)?, a.max_circles),
        StageConfig::GhtDetect(a) => {
            let params = a.params().map_err(tag)?;
            let table = load_rtable(a.model_path().map_err(tag)?)?;
            Planned::Ght(Box::new(table), params)
        }
    })
}

/// Runs every stage on a shared state:
/// - `current` is the image the next stage consumes,
/// - `gray` is the latest continuous-tone image (Harris and phase input).
///
/// Detection stages read edges from `current` at [`EDGE_LEVEL`].
fn run_pipeline(config: &PipelineConfig) -> Result<Artifacts, Failure> {
    let plans = config
        .stages
        .iter()
        .enumerate()
        .map(|(i, s)| plan(s, i))
        .collect::<Result<Vec<_>, _>>()?;
    let input = load(&config.input)?;
    let ext = config.format.extension();
    let mut out = Artifacts {
        dirs: vec![config.output_dir.clone()],
        ..Artifacts::default()
    };
    let stage_path =
        |i: usize, name: &str| config.output_dir.join(format!("{:02}-{name}.{ext}", i + 1));
    let mut current = input.clone();
    let mut gray = input.clone();
    let mut features = Vec::new();
    let mut any_detector = false;
    for (i, (stage, planned)) in config.stages.iter().zip(&plans).enumerate() {
        let path = stage_path(i, stage.name());
        match planned {
            Planned::Filter(spec) => {
                current = spec.apply(&current).map_err(invalid)?;
                gray = current.clone();
                out.image(&path, &current)?;
            }
            Planned::Edges(op, policy) => {
                current = edge_image(&current, *op, *policy)?;
                out.image(&path, &current)?;
            }
            Planned::Canny(params) => {
                current = canny(&current, params).map_err(invalid)?.to_image();
                out.image(&path, &current)?;
            }
            Planned::Harris(params) => {
                any_detector = true;
                let (resp, records) = harris_stage(&gray, params)?;
                out.image(&path, &resp)?;
                features.extend(records);
            }
            Planned::Lines(settings) => {
                any_detector = true;
                let (acc, records) =
                    line_stage(&EdgeMap::from_image(&current, EDGE_LEVEL), settings)?;
                out.image(&path, &acc.to_image())?;
                features.extend(records);
            }
            Planned::Circles(search, max) => {
                any_detector = true;
                let (accs, records) =
                    circle_stage(&EdgeMap::from_image(&current, EDGE_LEVEL), search, *max)?;
                for (acc, r) in accs.iter().zip(&search.radii) {
                    let name = format!("{}-r{r}", stage.name());
                    out.image(&stage_path(i, &name), &acc.to_image())?;
                }
                features.extend(records);
            }
            Planned::Ght(table, params) => {
                any_detector = true;
                let edges = EdgeMap::from_image(&current, EDGE_LEVEL);
                let (acc, records) = ght_stage(&edges, &gray, table, params)?;
                out.image(&path, &acc.to_image())?;
                features.extend(records);
            }
        }
    }
    if any_detector {
        out.features(Some(&config.output_dir.join("features.jsonl")), &features);
        out.image(
            &config.output_dir.join(format!("overlay.{ext}")),
            &render_overlay(&input, &features),
        )?;
    }
    Ok(out)
}

/// Runs one invocation (`argv[0]` is the program name) and returns its exit
/// status. Diagnostics go to `stderr`, feature streams to `stdout`.
pub fn run_with<S: AsRef<std::ffi::OsStr> + Clone>(
    argv: &[S],
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(|a| a.as_ref().to_os_string())) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match execute(cli.command).and_then(|a| a.commit(stdout)) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "{f}");
            f.exit_code()
        }
    }
}

pub fn run_command<S: AsRef<std::ffi::OsStr> + Clone>(argv: &[S]) -> i32 {
    run_with(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

/// Applies an `EDGECRAFT_THREADS` value: `0` runs everything on the calling
/// thread, `n` caps the worker pool at `n` threads.
pub fn apply_thread_limit(value: Option<&str>) -> Result<(), String> {
    let Some(v) = value.map(str::trim).filter(|v| !v.is_empty()) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| format!("EDGECRAFT_THREADS={v:?} is not a thread count"))?;
    if n == 0 {
        edgecraft_core::parallel::set_sequential(true);
    } else {
        // A pool that already exists keeps its size.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}
