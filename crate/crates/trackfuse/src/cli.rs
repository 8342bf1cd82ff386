//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when the data cannot be processed, 2 on
//! usage errors. Log verbosity comes from `TRACKFUSE_LOG` (`error`, `warn`,
//! `info`, `debug`; default `warn`); logs go to stderr and never into
//! artifacts.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use trackfuse_core::align::{OffsetEstimate, OffsetMode, OffsetSearch, DEFAULT_SEARCH_WINDOW_S};
use trackfuse_core::fuse::WeightParams;
use trackfuse_core::quality::{DEFAULT_COUNT_HALF_WINDOW_S, DEFAULT_GAP_THRESHOLD_S};
use trackfuse_core::sim::{generate, Episodes, Schedule, SimConfig};
use trackfuse_core::solar::CameraRig;
use trackfuse_core::{FlightId, Timestamp};

use crate::ingest::parse_timestamp;
use crate::manifest::Manifest;
use crate::output;
use crate::stages::{self, Loaded, TrackInputs};

pub const LOG_ENV: &str = "TRACKFUSE_LOG";

#[derive(Parser, Debug)]
#[command(
    name = "trackfuse",
    version,
    about = "Align and fuse two-receiver aircraft GPS tracks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate per-flight clock offsets (flight_id,min_distance_m,offset_seconds,...)
    Offsets {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        offset: OffsetArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Fuse O-GPS and offset-applied I-GPS into a synthetic track
    Fuse {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        offset: OffsetArgs,
        #[command(flatten)]
        weights: WeightArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Drop points over land or between widely spaced geotags
    Filter {
        /// Points to filter (canonical track CSV or fused CSV)
        #[arg(long, value_name = "CSV")]
        points: PathBuf,
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        offset: OffsetArgs,
        #[arg(long, value_name = "FILE")]
        mask: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_GAP_THRESHOLD_S, value_name = "SECONDS")]
        gap_threshold: f64,
        /// Per-flight report CSV
        #[arg(long, value_name = "CSV")]
        report: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Bearing, sun position and per-camera azimuth difference per fused point
    Features {
        #[arg(long, value_name = "CSV")]
        fused: PathBuf,
        /// Camera rig, `name=offset` lines
        #[arg(long, value_name = "FILE")]
        rig: Option<PathBuf>,
        /// Only emit rows whose flight and timestamp appear in this file
        #[arg(long, value_name = "CSV")]
        retained: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Neighbour-count summaries of gap-accepted and gap-rejected query times
    RejectStats {
        /// Query times (canonical track CSV or fused CSV)
        #[arg(long, value_name = "CSV")]
        points: PathBuf,
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        offset: OffsetArgs,
        #[arg(long, default_value_t = DEFAULT_GAP_THRESHOLD_S, value_name = "SECONDS")]
        gap_threshold: f64,
        #[arg(long, default_value_t = DEFAULT_COUNT_HALF_WINDOW_S, value_name = "SECONDS")]
        half_window: i64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Generate a ground-truth flight and both receiver tracks
    Simulate(Box<SimArgs>),
    /// Bearing error of a fused track against simulation truth
    Evaluate {
        #[arg(long, value_name = "CSV")]
        truth: PathBuf,
        #[arg(long, value_name = "CSV")]
        fused: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// offsets, fuse, filter and features in one run
    Pipeline {
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        offset: OffsetArgs,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, value_name = "FILE")]
        mask: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        rig: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_GAP_THRESHOLD_S, value_name = "SECONDS")]
        gap_threshold: f64,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// O-GPS track CSV (repeatable)
    #[arg(long, value_name = "CSV")]
    pub ogps: Vec<PathBuf>,
    /// I-GPS track CSV (repeatable)
    #[arg(long, value_name = "CSV")]
    pub igps: Vec<PathBuf>,
    /// Track CSV with a source column (repeatable)
    #[arg(long, value_name = "CSV")]
    pub tracks: Vec<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OffsetArgs {
    /// Use these offsets instead of estimating them
    #[arg(long, value_name = "CSV")]
    pub offsets: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEARCH_WINDOW_S, value_name = "SECONDS")]
    pub offset_window: i64,
    /// Take the median offset of the K closest pairs instead of the closest one
    #[arg(long, value_name = "K")]
    pub median_of_best: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct WeightArgs {
    #[arg(long, default_value_t = 8.0)]
    pub w_ogps: f64,
    #[arg(long, default_value_t = 5.0)]
    pub w_igps: f64,
    #[arg(long, default_value_t = 5.0)]
    pub w_synth: f64,
    /// Per second
    #[arg(long, default_value_t = 0.5)]
    pub w_temporal: f64,
    #[arg(long, default_value_t = 40, value_name = "SECONDS")]
    pub fuse_window: i64,
    #[arg(long, default_value_t = 5, value_name = "SECONDS")]
    pub seed_spacing: i64,
}

#[derive(Args, Debug, Clone)]
pub struct OutArg {
    /// Output file; stdout when absent. A manifest goes to `<out>.manifest`.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Random straight legs and turns
    Random,
    /// One heading for the whole flight
    Straight,
    /// 60 s straight, a 45° turn in 43.75 s, then straight
    Turn45,
    /// As turn45 with the turn in 20.75 s
    FastTurn45,
}

/// Any flag left out keeps the preset's value.
#[derive(Args, Debug, Clone)]
#[command(next_help_heading = "Simulation")]
pub struct SimArgs {
    #[arg(long, value_enum, default_value_t = Preset::Random)]
    pub preset: Preset,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub flight_id: Option<String>,
    /// Start time, UTC
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long, value_name = "SECONDS")]
    pub duration: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    pub origin_lat: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub origin_lon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub altitude: Option<f64>,
    #[arg(long)]
    pub speed: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub heading: Option<f64>,
    #[arg(long, value_name = "DEG_PER_S")]
    pub turn_rate: Option<f64>,
    #[arg(long)]
    pub min_leg: Option<f64>,
    #[arg(long)]
    pub max_leg: Option<f64>,
    #[arg(long)]
    pub min_turn: Option<f64>,
    #[arg(long)]
    pub max_turn: Option<f64>,
    #[arg(long)]
    pub ogps_rate: Option<i64>,
    #[arg(long)]
    pub ogps_noise: Option<f64>,
    #[arg(long)]
    pub outage_rate: Option<f64>,
    #[arg(long)]
    pub outage_min: Option<f64>,
    #[arg(long)]
    pub outage_max: Option<f64>,
    #[arg(long)]
    pub igps_rate: Option<f64>,
    #[arg(long)]
    pub igps_jitter: Option<f64>,
    #[arg(long)]
    pub pause_rate: Option<f64>,
    #[arg(long)]
    pub pause_min: Option<f64>,
    #[arg(long)]
    pub pause_max: Option<f64>,
    #[arg(long)]
    pub igps_noise: Option<f64>,
    #[arg(long)]
    pub igps_dof: Option<f64>,
    #[arg(long)]
    pub mirror_rate: Option<f64>,
    #[arg(long)]
    pub mirror_min: Option<f64>,
    #[arg(long)]
    pub mirror_max: Option<f64>,
    #[arg(long)]
    pub mirror_bias: Option<f64>,
    /// Seconds added to every I-GPS timestamp
    #[arg(long, allow_negative_numbers = true)]
    pub clock_offset: Option<i64>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

/// Why a run failed, which decides the exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

type Run<T = ()> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Run<T> {
    Err(Failure::Usage(msg.into()))
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn"))
        .format_timestamp(None)
        .try_init();
    match run(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {}", chain_message(&e));
            1
        }
    }
}

/// The error and its causes, skipping causes already spelled out by the
/// message above them.
fn chain_message(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let c = cause.to_string();
        if !msg.contains(&c) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&c);
        }
    }
    msg
}

impl InputArgs {
    fn to_inputs(&self) -> Run<TrackInputs> {
        let t = TrackInputs {
            ogps: self.ogps.clone(),
            igps: self.igps.clone(),
            tracks: self.tracks.clone(),
        };
        if t.is_empty() {
            return usage("no track input given (use --ogps/--igps or --tracks)");
        }
        Ok(t)
    }

    fn record(&self, m: &mut Manifest) {
        let join = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(";");
        m.set("ogps", join(&self.ogps))
            .set("igps", join(&self.igps))
            .set("tracks", join(&self.tracks));
    }
}

impl OffsetArgs {
    fn search(&self) -> Run<OffsetSearch> {
        if self.offset_window <= 0 {
            return usage("--offset-window must be positive");
        }
        let mode = match self.median_of_best {
            None => OffsetMode::ClosestPair,
            Some(0) => return usage("--median-of-best must be at least 1"),
            Some(k) => OffsetMode::MedianOfBest(k),
        };
        Ok(OffsetSearch {
            window_s: self.offset_window,
            mode,
        })
    }

    fn resolve(&self, loaded: &Loaded) -> Run<Vec<OffsetEstimate>> {
        match &self.offsets {
            Some(p) => Ok(stages::read_offsets(p)?),
            None => Ok(stages::estimate_offsets(&loaded.bundles, &self.search()?)?),
        }
    }

    fn record(&self, m: &mut Manifest) {
        m.set(
            "offsets_file",
            self.offsets
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        )
        .set("offset_window_s", self.offset_window)
        .set(
            "offset_mode",
            match self.median_of_best {
                None => "closest_pair".to_string(),
                Some(k) => format!("median_of_best_{k}"),
            },
        );
    }
}

impl WeightArgs {
    fn params(&self) -> Run<WeightParams> {
        let p = WeightParams {
            w_ogps: self.w_ogps,
            w_igps: self.w_igps,
            w_synth: self.w_synth,
            w_temporal: self.w_temporal,
            window_s: self.fuse_window,
            seed_spacing_s: self.seed_spacing,
        };
        match p.validate() {
            Ok(()) => Ok(p),
            Err(e) => usage(e.to_string()),
        }
    }

    fn record(&self, m: &mut Manifest) {
        m.set("w_ogps", self.w_ogps)
            .set("w_igps", self.w_igps)
            .set("w_synth", self.w_synth)
            .set("w_temporal_per_s", self.w_temporal)
            .set("fuse_window_s", self.fuse_window)
            .set("seed_spacing_s", self.seed_spacing);
    }
}

fn check_gap(th: f64) -> Run {
    if th.is_finite() && th >= 0.0 {
        Ok(())
    } else {
        usage("--gap-threshold must be a non-negative number")
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Run {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes `bytes` to `--out` (plus its manifest) or to stdout.
fn emit(out: &OutArg, bytes: &[u8], manifest: &mut Manifest) -> Run {
    match &out.out {
        Some(p) => {
            write_file(p, bytes)?;
            let mut m = Vec::new();
            manifest.write(&mut m)?;
            write_file(&manifest_path(p), &m)
        }
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn record_load(m: &mut Manifest, loaded: &Loaded) {
    m.set("flights", loaded.bundles.len())
        .set(
            "excluded_flights",
            loaded
                .excluded
                .iter()
                .map(|e| format!("{}:no_{}", e.flight_id, e.missing))
                .collect::<Vec<_>>()
                .join(";"),
        )
        .set("duplicate_fixes_dropped", loaded.duplicates);
}

fn load(inputs: &InputArgs) -> Run<Loaded> {
    let loaded = stages::load(&inputs.to_inputs()?)?;
    if loaded.bundles.is_empty() {
        return Err(Failure::Data(anyhow::anyhow!(
            "no flight has both O-GPS and I-GPS fixes"
        )));
    }
    Ok(loaded)
}

fn buf(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Run<Vec<u8>> {
    let mut v = Vec::new();
    f(&mut v)?;
    Ok(v)
}

fn read_rig_opt(rig: Option<&PathBuf>) -> Run<CameraRig> {
    Ok(match rig {
        Some(p) => crate::rig::read_rig(p)?,
        None => CameraRig::new(),
    })
}

fn opt_path(p: Option<&PathBuf>) -> String {
    p.map(|p| p.display().to_string()).unwrap_or_default()
}

pub fn run(command: Command) -> Run {
    match command {
        Command::Offsets { inputs, offset, out } => {
            let search = offset.search()?;
            if offset.offsets.is_some() {
                return usage("offsets estimates offsets; --offsets is not accepted here");
            }
            let loaded = load(&inputs)?;
            let est = stages::estimate_offsets(&loaded.bundles, &search)?;
            let mut m = Manifest::new("offsets");
            inputs.record(&mut m);
            offset.record(&mut m);
            record_load(&mut m, &loaded);
            emit(&out, &buf(|w| output::write_offsets(w, &est))?, &mut m)
        }
        Command::Fuse {
            inputs,
            offset,
            weights,
            out,
        } => {
            let params = weights.params()?;
            offset.search()?;
            let loaded = load(&inputs)?;
            let est = offset.resolve(&loaded)?;
            let fused = stages::fuse_all(&loaded.bundles, &est, &params)?;
            let rows = output::fused_rows(&fused)?;
            let mut m = Manifest::new("fuse");
            inputs.record(&mut m);
            offset.record(&mut m);
            weights.record(&mut m);
            record_load(&mut m, &loaded);
            emit(&out, &buf(|w| output::write_fused(w, &rows))?, &mut m)
        }
        Command::Filter {
            points,
            inputs,
            offset,
            mask,
            gap_threshold,
            report,
            out,
        } => {
            check_gap(gap_threshold)?;
            offset.search()?;
            let loaded = load(&inputs)?;
            let est = offset.resolve(&loaded)?;
            let mask_v = mask.as_ref().map(|p| crate::mask::read_mask(p)).transpose()?;
            let pts = stages::read_points(&points)?;
            let (kept, reports) = stages::filter_all(pts, &loaded.bundles, &est, mask_v.as_ref(), gap_threshold)?;
            let mut m = Manifest::new("filter");
            m.set("points", points.display());
            inputs.record(&mut m);
            offset.record(&mut m);
            m.set("mask", opt_path(mask.as_ref()))
                .set("gap_threshold_s", gap_threshold)
                .set("report", opt_path(report.as_ref()));
            record_load(&mut m, &loaded);
            if let Some(r) = &report {
                write_file(r, &buf(|w| output::write_quality(w, &reports))?)?;
            }
            emit(&out, &buf(|w| output::write_tracks(w, &kept))?, &mut m)
        }
        Command::Features {
            fused,
            rig,
            retained,
            out,
        } => {
            let rig_v = read_rig_opt(rig.as_ref())?;
            let tracks = stages::fused_tracks_from_rows(stages::read_fused(&fused)?)?;
            let keep = match &retained {
                Some(p) => Some(stages::keep_set(&stages::read_points(p)?)),
                None => None,
            };
            let rows = stages::features_all(&tracks, &rig_v, keep.as_ref())?;
            let mut m = Manifest::new("features");
            m.set("fused", fused.display())
                .set("rig", opt_path(rig.as_ref()))
                .set("cameras", rig_cameras(&rig_v))
                .set("retained", opt_path(retained.as_ref()));
            emit(&out, &buf(|w| output::write_features(w, &rig_v, &rows))?, &mut m)
        }
        Command::RejectStats {
            points,
            inputs,
            offset,
            gap_threshold,
            half_window,
            out,
        } => {
            check_gap(gap_threshold)?;
            if half_window < 0 {
                return usage("--half-window must be non-negative");
            }
            offset.search()?;
            let loaded = load(&inputs)?;
            let est = offset.resolve(&loaded)?;
            let mut queries: BTreeMap<FlightId, Vec<Timestamp>> = BTreeMap::new();
            for p in stages::read_points(&points)? {
                queries.entry(p.flight_id).or_default().push(p.timestamp);
            }
            let stats = stages::reject_stats(&queries, &loaded.bundles, &est, gap_threshold, half_window)?;
            let rows: Vec<_> = stats
                .iter()
                .flat_map(|s| [(s.cluster, "ogps", s.n, s.ogps), (s.cluster, "igps", s.n, s.igps)])
                .collect();
            let mut m = Manifest::new("reject-stats");
            m.set("points", points.display());
            inputs.record(&mut m);
            offset.record(&mut m);
            m.set("gap_threshold_s", gap_threshold)
                .set("half_window_s", half_window);
            record_load(&mut m, &loaded);
            emit(&out, &buf(|w| output::write_count_summaries(w, &rows))?, &mut m)
        }
        Command::Simulate(args) => simulate(*args),
        Command::Evaluate { truth, fused, out } => {
            let truth_v = stages::read_truth(&truth)?;
            let tracks = stages::fused_tracks_from_rows(stages::read_fused(&fused)?)?;
            let metrics = stages::evaluate_all(&truth_v, &tracks)?;
            let mut m = Manifest::new("evaluate");
            m.set("truth", truth.display()).set("fused", fused.display());
            emit(&out, &buf(|w| output::write_metrics(w, &metrics))?, &mut m)
        }
        Command::Pipeline {
            inputs,
            offset,
            weights,
            mask,
            rig,
            gap_threshold,
            out_dir,
        } => {
            let params = weights.params()?;
            check_gap(gap_threshold)?;
            offset.search()?;
            let rig_v = read_rig_opt(rig.as_ref())?;
            let mask_v = mask.as_ref().map(|p| crate::mask::read_mask(p)).transpose()?;
            let loaded = load(&inputs)?;
            let est = offset.resolve(&loaded)?;
            let fused = stages::fuse_all(&loaded.bundles, &est, &params)?;
            let fused_rows = output::fused_rows(&fused)?;
            let mut geo = Vec::new();
            for t in &fused {
                geo.extend(t.to_geo()?);
            }
            let (kept, reports) = stages::filter_all(geo, &loaded.bundles, &est, mask_v.as_ref(), gap_threshold)?;
            let features = stages::features_all(&fused, &rig_v, Some(&stages::keep_set(&kept)))?;

            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            let artifacts: [(&str, Vec<u8>); 5] = [
                ("offsets.csv", buf(|w| output::write_offsets(w, &est))?),
                ("fused.csv", buf(|w| output::write_fused(w, &fused_rows))?),
                ("retained.csv", buf(|w| output::write_tracks(w, &kept))?),
                ("quality_report.csv", buf(|w| output::write_quality(w, &reports))?),
                ("features.csv", buf(|w| output::write_features(w, &rig_v, &features))?),
            ];
            for (name, bytes) in &artifacts {
                write_file(&out_dir.join(name), bytes)?;
            }
            let mut m = Manifest::new("pipeline");
            inputs.record(&mut m);
            offset.record(&mut m);
            weights.record(&mut m);
            m.set("mask", opt_path(mask.as_ref()))
                .set("rig", opt_path(rig.as_ref()))
                .set("cameras", rig_cameras(&rig_v))
                .set("gap_threshold_s", gap_threshold)
                .set(
                    "artifacts",
                    artifacts.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(";"),
                );
            record_load(&mut m, &loaded);
            write_file(&out_dir.join("manifest.txt"), &buf(|w| m.write(w))?)
        }
    }
}

fn rig_cameras(rig: &CameraRig) -> String {
    rig.cameras()
        .map(|(n, o)| format!("{n}:{o}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Resolved simulation config: preset first, then any explicit flags.
pub fn sim_config(a: &SimArgs) -> Run<SimConfig> {
    let mut c = match a.preset {
        Preset::Random => SimConfig::default(),
        Preset::Straight => SimConfig {
            schedule: Schedule::Legs(Vec::new()),
            ..SimConfig::default()
        },
        Preset::Turn45 => SimConfig::turn_45_preset(),
        Preset::FastTurn45 => SimConfig::fast_turn_45_preset(),
    };
    macro_rules! set {
        ($($flag:ident => $field:expr),* $(,)?) => {
            $(if let Some(v) = a.$flag.clone() { $field = v; })*
        };
    }
    set!(
        seed => c.seed,
        duration => c.duration_s,
        origin_lat => c.origin_lat,
        origin_lon => c.origin_lon,
        altitude => c.altitude_m,
        speed => c.speed_mps,
        heading => c.initial_heading_deg,
        turn_rate => c.turn_rate_deg_s,
        ogps_rate => c.ogps_rate_s,
        ogps_noise => c.ogps_noise_m,
        outage_rate => c.ogps_outages.rate_per_hour,
        outage_min => c.ogps_outages.min_s,
        outage_max => c.ogps_outages.max_s,
        igps_rate => c.igps_rate_s,
        igps_jitter => c.igps_jitter_s,
        pause_rate => c.igps_pauses.rate_per_hour,
        pause_min => c.igps_pauses.min_s,
        pause_max => c.igps_pauses.max_s,
        igps_noise => c.igps_noise_m,
        igps_dof => c.igps_noise_dof,
        mirror_rate => c.mirror.rate_per_hour,
        mirror_min => c.mirror.min_s,
        mirror_max => c.mirror.max_s,
        mirror_bias => c.mirror_bias_m,
        clock_offset => c.clock_offset_s,
    );
    if let Some(f) = &a.flight_id {
        if f.is_empty() || f.contains(',') {
            return usage("--flight-id must be non-empty and contain no comma");
        }
        c.flight_id = FlightId::new(f.as_str());
    }
    if let Some(s) = &a.start {
        c.start = match parse_timestamp(s) {
            Some(t) => t,
            None => return usage(format!("--start: cannot parse `{s}`")),
        };
    }
    let leg_flags = [a.min_leg, a.max_leg, a.min_turn, a.max_turn];
    match &mut c.schedule {
        Schedule::RandomTurns {
            min_leg_s,
            max_leg_s,
            min_turn_deg,
            max_turn_deg,
        } => {
            for (v, f) in [min_leg_s, max_leg_s, min_turn_deg, max_turn_deg]
                .into_iter()
                .zip(leg_flags)
            {
                if let Some(x) = f {
                    *v = x;
                }
            }
        }
        Schedule::Legs(_) => {
            if leg_flags.iter().any(Option::is_some) {
                return usage("--min-leg/--max-leg/--min-turn/--max-turn only apply to the random preset");
            }
        }
    }
    if let Err(e) = c.validate() {
        return usage(e.to_string());
    }
    Ok(c)
}

fn record_sim(m: &mut Manifest, c: &SimConfig, preset: Preset) {
    let ep = |m: &mut Manifest, k: &str, e: &Episodes| {
        m.set(&format!("{k}_rate_per_hour"), e.rate_per_hour)
            .set(&format!("{k}_min_s"), e.min_s)
            .set(&format!("{k}_max_s"), e.max_s);
    };
    m.set("preset", format!("{preset:?}").to_lowercase())
        .set("seed", c.seed)
        .set("flight_id", &c.flight_id)
        .set("start", c.start)
        .set("duration_s", c.duration_s)
        .set("origin_lat", c.origin_lat)
        .set("origin_lon", c.origin_lon)
        .set("altitude_m", c.altitude_m)
        .set("speed_mps", c.speed_mps)
        .set("initial_heading_deg", c.initial_heading_deg)
        .set("turn_rate_deg_s", c.turn_rate_deg_s);
    match &c.schedule {
        Schedule::RandomTurns {
            min_leg_s,
            max_leg_s,
            min_turn_deg,
            max_turn_deg,
        } => {
            m.set("schedule", "random_turns")
                .set("min_leg_s", min_leg_s)
                .set("max_leg_s", max_leg_s)
                .set("min_turn_deg", min_turn_deg)
                .set("max_turn_deg", max_turn_deg);
        }
        Schedule::Legs(legs) => {
            m.set("schedule", format!("legs:{legs:?}"));
        }
    }
    m.set("ogps_rate_s", c.ogps_rate_s).set("ogps_noise_m", c.ogps_noise_m);
    ep(m, "ogps_outage", &c.ogps_outages);
    m.set("igps_rate_s", c.igps_rate_s)
        .set("igps_jitter_s", c.igps_jitter_s);
    ep(m, "igps_pause", &c.igps_pauses);
    m.set("igps_noise_m", c.igps_noise_m)
        .set("igps_noise_dof", c.igps_noise_dof);
    ep(m, "mirror", &c.mirror);
    m.set("mirror_bias_m", c.mirror_bias_m)
        .set("clock_offset_s", c.clock_offset_s);
}

fn simulate(a: SimArgs) -> Run {
    let c = sim_config(&a)?;
    let (truth, bundle) = generate(&c)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    write_file(
        &a.out_dir.join("ogps.csv"),
        &buf(|w| output::write_tracks(w, bundle.o_track().points()))?,
    )?;
    write_file(
        &a.out_dir.join("igps.csv"),
        &buf(|w| output::write_tracks(w, bundle.i_track().points()))?,
    )?;
    write_file(&a.out_dir.join("truth.csv"), &buf(|w| output::write_truth(w, &truth))?)?;
    let mut m = Manifest::new("simulate");
    record_sim(&mut m, &c, a.preset);
    m.set("artifacts", "ogps.csv;igps.csv;truth.csv");
    write_file(&a.out_dir.join("manifest.txt"), &buf(|w| m.write(w))?)
}
