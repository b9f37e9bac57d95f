//! `tactmap`: render tactile map sheets from an OSM extract.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tactmap_core::geodata::project;
use tactmap_core::pipeline::LEGEND_FILE;
use tactmap_core::sheetgrid::sheet_for_point;
use tactmap_core::{
    render_legend_sheet, run_job, JobError, JobRequest, LonLat, ProjectionConfig, Selection, SheetId, StyleSheet,
};

const EXIT_USAGE: u8 = 1;
const EXIT_JOB: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "tactmap", version, about = "Tactile street map sheets for Braille readers")]
struct Cli {
    /// Latitude of the projection origin.
    #[arg(long, global = true, default_value_t = ProjectionConfig::default().origin.lat, allow_negative_numbers = true)]
    origin_lat: f64,
    /// Longitude of the projection origin.
    #[arg(long, global = true, default_value_t = ProjectionConfig::default().origin.lon, allow_negative_numbers = true)]
    origin_lon: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a set of adjacent sheets.
    Render(RenderArgs),
    /// Print the sheet that contains a coordinate.
    SheetOf {
        #[arg(long, allow_negative_numbers = true)]
        lat: f64,
        #[arg(long, allow_negative_numbers = true)]
        lon: f64,
        #[arg(long)]
        json: bool,
    },
    /// Render the symbol legend page.
    Legend {
        #[arg(long)]
        /// Output file, or a directory to hold legend.png.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = tactmap_core::render::DEFAULT_DPI)]
        dpi: u32,
        /// Style sheet (JSON).
        #[arg(long)]
        style: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// OSM XML extract.
    #[arg(long)]
    source: PathBuf,
    /// Block center as LAT,LON.
    #[arg(long, value_parser = parse_lat_lon, allow_hyphen_values = true, conflicts_with = "sheets", requires_all = ["rows", "cols"])]
    center: Option<LonLat>,
    /// Sheets north to south in the block.
    #[arg(long)]
    rows: Option<u32>,
    /// Sheets west to east in the block.
    #[arg(long)]
    cols: Option<u32>,
    /// Comma-separated designations, e.g. C0R0,C1R0.
    #[arg(long, value_delimiter = ',', required_unless_present = "center")]
    sheets: Vec<SheetId>,
    /// Output directory for the separate files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = tactmap_core::render::DEFAULT_DPI)]
    dpi: u32,
    /// Also render legend.png.
    #[arg(long)]
    legend: bool,
    /// Map key rules replacing the built-in table.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Style sheet (JSON).
    #[arg(long)]
    style: Option<PathBuf>,
    /// Extra Braille letters as a TSV table.
    #[arg(long)]
    alphabet: Option<PathBuf>,
    /// Wide-corridor share of a sheet above which wide streets are drawn narrow;
    /// 1 or more disables demotion.
    #[arg(long)]
    density_threshold: Option<f64>,
    /// Write the ZIP archive here as well.
    #[arg(long)]
    archive: Option<PathBuf>,
    /// Print a JSON summary on stdout.
    #[arg(long)]
    json: bool,
}

fn parse_lat_lon(s: &str) -> Result<LonLat, String> {
    let (lat, lon) = s.split_once(',').ok_or("expected LAT,LON")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(LonLat::new(num(lon)?, num(lat)?))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let projection = ProjectionConfig::with_origin(cli.origin_lon, cli.origin_lat);
    let result = match cli.command {
        Command::Render(args) => render(args, projection),
        Command::SheetOf { lat, lon, json } => sheet_of(lat, lon, json, &projection),
        Command::Legend { out, dpi, style } => legend(&out, dpi, style.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tactmap: {e}");
            ExitCode::from(EXIT_JOB)
        }
    }
}

fn render(args: RenderArgs, projection: ProjectionConfig) -> Result<(), JobError> {
    let selection = match args.center {
        Some(center) => Selection::Block {
            center,
            rows: args.rows.unwrap_or(1),
            cols: args.cols.unwrap_or(1),
        },
        None => Selection::Sheets(args.sheets),
    };
    let req = JobRequest {
        dpi: args.dpi,
        include_legend: args.legend,
        rules: args.rules,
        style: args.style,
        alphabet: args.alphabet,
        density_threshold: args.density_threshold,
        projection,
        ..JobRequest::new(args.source, selection)
    };
    let output = run_job(&req)?;
    output.write_to_dir(&args.out)?;
    if let Some(path) = args.archive {
        write(&path, &output.archive)?;
    }
    let summary = output.summary();
    for sheet in &summary.sheets {
        eprintln!("rendered {sheet}");
    }
    if args.json {
        println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    }
    Ok(())
}

fn sheet_of(lat: f64, lon: f64, json: bool, projection: &ProjectionConfig) -> Result<(), JobError> {
    let p = project(LonLat::new(lon, lat), projection)?;
    let id = sheet_for_point(p);
    let b = id.bounds();
    if json {
        let v = serde_json::json!({
            "designation": id.designation(),
            "bounds": {"min_x": b.min_x, "min_y": b.min_y, "max_x": b.max_x, "max_y": b.max_y},
        });
        println!("{v}");
    } else {
        println!("{id}");
        println!("x {} .. {} m, y {} .. {} m", b.min_x, b.max_x, b.min_y, b.max_y);
    }
    Ok(())
}

fn legend(out: &Path, dpi: u32, style: Option<&Path>) -> Result<(), JobError> {
    if !tactmap_core::pipeline::DPI_RANGE.contains(&dpi) {
        return Err(JobError::InvalidRequest(format!("dpi {dpi} outside 100..=1200")));
    }
    let style = match style {
        Some(path) => StyleSheet::from_json(&read(path)?)?,
        None => StyleSheet::default(),
    };
    let path = if out.is_dir() { out.join(LEGEND_FILE) } else { out.to_owned() };
    write(&path, &render_legend_sheet(&style, dpi).to_png())
}

fn read(path: &Path) -> Result<String, JobError> {
    std::fs::read_to_string(path).map_err(|source| JobError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, data: &[u8]) -> Result<(), JobError> {
    std::fs::write(path, data).map_err(|source| JobError::Io {
        path: path.to_owned(),
        source,
    })
}
