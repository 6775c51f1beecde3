//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use mma_core::beamforming::{run_campaign, CampaignSpec, Scheme, UserSpec};
use mma_core::error::{Error, Result};
use mma_core::io;
use mma_core::ports::{
    candidate_elements, optimize_ports, CouplingKind, DbConvention, OptimizeOptions,
    OptimizeOutcome,
};
use mma_core::*;

use crate::patterns_io;

#[derive(Args)]
pub struct MeshArgs {
    /// Plate shape: rectangle | square | hexagon | notched-rectangle.
    #[arg(long)]
    shape: String,
    /// Rectangle width in wavelengths (x direction).
    #[arg(long)]
    width: Option<f64>,
    /// Rectangle height in wavelengths (y direction).
    #[arg(long)]
    height: Option<f64>,
    /// Square side length in wavelengths.
    #[arg(long)]
    side: Option<f64>,
    /// Hexagon circumradius in wavelengths.
    #[arg(long)]
    circumradius: Option<f64>,
    /// Notch width (notched-rectangle only).
    #[arg(long)]
    notch_width: Option<f64>,
    /// Notch height (notched-rectangle only).
    #[arg(long)]
    notch_height: Option<f64>,
    /// Target edge length in wavelengths.
    #[arg(long)]
    h: f64,
    /// Output mesh JSON path.
    #[arg(long)]
    out: PathBuf,
}

fn require(opt: Option<f64>, name: &str) -> Result<f64> {
    opt.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required for this shape")))
}

pub fn run_mesh(args: MeshArgs) -> Result<i32> {
    let mesh = match args.shape.as_str() {
        "rectangle" => make_plate_mesh(
            PlateSpec::Rectangle {
                width: require(args.width, "width")?,
                height: require(args.height, "height")?,
            },
            args.h,
        )?,
        "square" => make_plate_mesh(
            PlateSpec::Square {
                side: require(args.side, "side")?,
            },
            args.h,
        )?,
        "hexagon" => make_plate_mesh(
            PlateSpec::Hexagon {
                circumradius: require(args.circumradius, "circumradius")?,
            },
            args.h,
        )?,
        "notched-rectangle" => make_notched_plate_mesh(
            require(args.width, "width")?,
            require(args.height, "height")?,
            require(args.notch_width, "notch-width")?,
            require(args.notch_height, "notch-height")?,
            args.h,
        )?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown shape '{other}' (expected rectangle | square | hexagon | notched-rectangle)"
            )))
        }
    };
    io::write_json_file(&args.out, &mesh)?;
    println!(
        "mesh: {} vertices, {} triangles -> {}",
        mesh.vertices.len(),
        mesh.triangles.len(),
        args.out.display()
    );
    Ok(0)
}

fn parse_grid(text: &str) -> Result<SphereGrid> {
    let (t, p) = text
        .split_once('x')
        .ok_or_else(|| Error::InvalidArgument(format!("grid '{text}' must look like 36x72")))?;
    let n_theta = t
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad grid theta count '{t}'")))?;
    let n_phi = p
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad grid phi count '{p}'")))?;
    SphereGrid::new(n_theta, n_phi)
}

fn load_mesh(path: &Path) -> Result<TriMesh> {
    let mesh: TriMesh = io::read_json_file(path)?;
    mesh.validate()?;
    Ok(mesh)
}

#[derive(Args)]
pub struct CmaArgs {
    /// Input mesh JSON.
    #[arg(long)]
    mesh: PathBuf,
    /// Number of characteristic modes to retain.
    #[arg(long, default_value_t = 12)]
    modes: usize,
    /// Output modal report JSON.
    #[arg(long)]
    out: PathBuf,
    /// Directory for per-mode far-field CSVs (optional).
    #[arg(long)]
    far_field_dir: Option<PathBuf>,
    /// Far-field sphere grid, e.g. 36x72.
    #[arg(long, default_value = "36x72")]
    grid: String,
}

pub fn run_cma(args: CmaArgs) -> Result<i32> {
    let mesh = load_mesh(&args.mesh)?;
    let basis = build_rwg_basis(&mesh)?;
    let zop = assemble_impedance(&basis)?;
    println!(
        "impedance operator: N={}, pre-averaging asymmetry {:.2e}",
        zop.n(),
        zop.raw_asymmetry
    );
    let mut cma = solve_characteristic_modes(&zop, args.modes.min(basis.basis_count()))?;

    // Symmetry classification when the shape carries a point group.
    if mesh.shape != ShapeTag::Custom {
        let group = symmetry_group_of(&basis)?;
        let (classified, _) = classify_symmetry(&cma, &group, &zop)?;
        cma = classified;
        println!(
            "symmetry group order {} supports up to {} uncorrelated ports",
            group.order(),
            max_uncorrelated_ports(&group)
        );
    }

    if let Some(dir) = &args.far_field_dir {
        let grid = parse_grid(&args.grid)?;
        cma.attach_far_fields(&basis, &grid)?;
        std::fs::create_dir_all(dir)?;
        for (i, field) in cma.far_fields.iter().enumerate() {
            let path = dir.join(format!("mode_{i:03}.csv"));
            std::fs::write(&path, io::far_field_csv(field))?;
        }
        println!("far fields: {} CSVs -> {}", cma.far_fields.len(), dir.display());
    }

    let report = io::ModalReport::from_basis(&cma);
    io::write_json_file(&args.out, &report)?;
    println!(
        "modal report: {} modes ({} significant) -> {}",
        report.modes.len(),
        report.significant_count,
        args.out.display()
    );
    Ok(0)
}

#[derive(Args)]
pub struct PortsArgs {
    /// Input mesh JSON.
    #[arg(long)]
    mesh: PathBuf,
    /// Number of characteristic modes to retain.
    #[arg(long, default_value_t = 12)]
    modes: usize,
    /// Number of ports to synthesize.
    #[arg(long)]
    target_ports: usize,
    /// Pairwise correlation ceiling in dB.
    #[arg(long, default_value_t = -9.5, allow_negative_numbers = true)]
    max_corr_db: f64,
    /// dB convention for the ceiling: power (10 log10) | magnitude (20 log10).
    #[arg(long, default_value = "power")]
    corr_db_convention: String,
    /// Candidate coupling-element sites per seeded mode.
    #[arg(long, default_value_t = 10)]
    candidates_per_mode: usize,
    /// Element budget per port.
    #[arg(long, default_value_t = 4)]
    max_elements: usize,
    /// Output port-set JSON.
    #[arg(long)]
    out: PathBuf,
}

pub fn run_ports(args: PortsArgs) -> Result<i32> {
    let mesh = load_mesh(&args.mesh)?;
    let basis = build_rwg_basis(&mesh)?;
    let zop = assemble_impedance(&basis)?;
    let cma = solve_characteristic_modes(&zop, args.modes.min(basis.basis_count()))?;

    let convention = match args.corr_db_convention.as_str() {
        "power" => DbConvention::Power,
        "magnitude" => DbConvention::Magnitude,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown dB convention '{other}' (expected power | magnitude)"
            )))
        }
    };

    let mut candidates = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for mode in 0..args.target_ports.min(cma.mode_count()) {
        for e in candidate_elements(
            &cma,
            &basis,
            mode,
            CouplingKind::Inductive,
            args.candidates_per_mode,
        )? {
            if seen.insert(e.site) {
                candidates.push(e);
            }
        }
    }

    let opts = OptimizeOptions {
        max_ecc_db: args.max_corr_db,
        db_convention: convention,
        max_elements_per_port: args.max_elements,
        ..Default::default()
    };
    let outcome = optimize_ports(&cma, &candidates, args.target_ports, &opts)?;
    let file = io::PortSetFile::from_port_set(outcome.port_set(), &candidates);
    io::write_json_file(&args.out, &file)?;
    match outcome {
        OptimizeOutcome::Feasible(ps) => {
            let worst = ps
                .correlation
                .max_offdiag()
                .map(|(_, _, v)| 10.0 * v.log10().max(-300.0));
            println!(
                "ports: {} synthesized, worst pair {} dB -> {}",
                ps.ports.len(),
                worst.map(|v| format!("{v:.1}")).unwrap_or_else(|| "n/a".into()),
                args.out.display()
            );
            Ok(0)
        }
        OptimizeOutcome::Infeasible {
            best,
            requested_ports,
            binding_pair,
        } => {
            println!(
                "ports: infeasible at {} dB; achieved {}/{} (binding pair {:?}) -> {}",
                args.max_corr_db,
                best.achieved,
                requested_ports,
                binding_pair,
                args.out.display()
            );
            Ok(4)
        }
    }
}

#[derive(Args)]
pub struct ArrayArgs {
    /// Tiling: grid | hex.
    #[arg(long)]
    tiling: String,
    /// Grid element count in x.
    #[arg(long)]
    nx: Option<usize>,
    /// Grid element count in y.
    #[arg(long)]
    ny: Option<usize>,
    /// Square element side length (grid tiling).
    #[arg(long)]
    side: Option<f64>,
    /// Hexagon rings around the center element (hex tiling).
    #[arg(long)]
    rings: Option<usize>,
    /// Hexagon element circumradius (hex tiling).
    #[arg(long)]
    circumradius: Option<f64>,
    /// Edge-to-edge gap between elements.
    #[arg(long)]
    gap: f64,
    /// Antenna ports per element.
    #[arg(long)]
    ports_per_element: usize,
    /// Output layout JSON.
    #[arg(long)]
    out: PathBuf,
    /// Reference layout JSON for the size comparison.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Output path for comparison metrics (requires --reference).
    #[arg(long)]
    metrics_out: Option<PathBuf>,
    /// Write the element port-pattern table CSV (synthetic pattern family).
    #[arg(long)]
    patterns_out: Option<PathBuf>,
}

pub fn run_array(args: ArrayArgs) -> Result<i32> {
    let layout = match args.tiling.as_str() {
        "grid" => layout_grid(
            args.nx
                .ok_or_else(|| Error::InvalidArgument("--nx required for grid".into()))?,
            args.ny
                .ok_or_else(|| Error::InvalidArgument("--ny required for grid".into()))?,
            require(args.side, "side")?,
            args.gap,
            args.ports_per_element,
        )?,
        "hex" => layout_hex(
            args.rings
                .ok_or_else(|| Error::InvalidArgument("--rings required for hex".into()))?,
            require(args.circumradius, "circumradius")?,
            args.gap,
            args.ports_per_element,
        )?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown tiling '{other}' (expected grid | hex)"
            )))
        }
    };
    io::write_json_file(&args.out, &layout)?;
    println!(
        "layout: {} elements x {} ports = {} Tx ports, area {:.2} wavelengths^2 -> {}",
        layout.element_count(),
        layout.ports_per_element,
        layout.total_ports(),
        layout.footprint_area(),
        args.out.display()
    );

    if let Some(reference) = &args.reference {
        let ref_layout: ArrayLayout = io::read_json_file(reference)?;
        let metrics = array_metrics(&layout, &ref_layout);
        if let Some(path) = &args.metrics_out {
            io::write_json_file(path, &metrics)?;
        }
        match metrics.reduction_percent {
            Some(red) => println!(
                "comparison: {:.2} vs {:.2} wavelengths^2 -> {:.0}% reduction",
                metrics.area,
                metrics.reference_area,
                red.floor()
            ),
            None => println!(
                "comparison flagged: port counts differ ({} vs {})",
                metrics.ports, metrics.reference_ports
            ),
        }
    }

    if let Some(path) = &args.patterns_out {
        let grid = SphereGrid::new(36, 72)?;
        let fields = patterns_io::synthetic_pattern_fields(args.ports_per_element, &grid);
        std::fs::write(path, io::pattern_table_csv(&fields))?;
        println!("patterns: {} ports -> {}", args.ports_per_element, path.display());
    }
    Ok(0)
}

/// Simulation pipeline config: campaign parameters plus file references.
#[derive(Debug, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub layout_file: PathBuf,
    #[serde(default)]
    pub patterns_file: Option<PathBuf>,
    pub users: Vec<UserSpec>,
    pub subcarriers: usize,
    pub schemes: Vec<Scheme>,
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub p_tx: f64,
    #[serde(default)]
    pub n_rf_fully_connected: Option<usize>,
    #[serde(default)]
    pub phase_bits: Option<u32>,
    #[serde(default)]
    pub max_streams: Option<usize>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Pipeline config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output report JSON.
    #[arg(long)]
    out: PathBuf,
    /// Flat CSV (scheme, seed, snr_db, sum_rate) for plotting.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Override the config seed(s) with a single seed.
    #[arg(long)]
    seed: Option<u64>,
}

pub fn run_simulate(args: SimulateArgs) -> Result<i32> {
    let config: PipelineConfig = io::read_json_file(&args.config)?;

    // Fail-fast: all referenced inputs must exist and parse before any
    // stage runs.
    let layout: ArrayLayout = io::read_json_file(&config.layout_file).map_err(|e| {
        Error::ConfigError {
            path: "layout_file".into(),
            message: e.to_string(),
        }
    })?;
    let patterns = match &config.patterns_file {
        Some(path) => patterns_io::read_pattern_table(path).map_err(|e| Error::ConfigError {
            path: "patterns_file".into(),
            message: e.to_string(),
        })?,
        None => {
            let grid = SphereGrid::new(36, 72)?;
            PortPatternTable::synthetic(layout.ports_per_element, &grid)
        }
    };

    let mut seeds = config.seeds.clone();
    if seeds.is_empty() {
        if let Some(s) = config.seed {
            seeds = vec![s];
        }
    }
    if let Some(s) = args.seed {
        seeds = vec![s];
    }
    let spec = CampaignSpec {
        users: config.users.clone(),
        subcarriers: config.subcarriers,
        schemes: config.schemes.clone(),
        snr_db: config.snr_db.clone(),
        seeds,
        p_tx: config.p_tx,
        n_rf_fully_connected: config.n_rf_fully_connected,
        phase_bits: config.phase_bits,
        max_streams: config.max_streams,
    };
    let report = run_campaign(&layout, &patterns, &spec)?;
    io::write_json_file(&args.out, &report)?;
    if let Some(csv) = &args.csv {
        std::fs::write(csv, io::rate_rows_csv(&report.rows))?;
    }
    for mean in &report.means {
        println!(
            "{}: snr {:+.1} dB -> mean sum rate {:.3} bit/s/Hz",
            mean.scheme, mean.snr_db, mean.mean_sum_rate
        );
    }
    println!("report -> {}", args.out.display());
    Ok(0)
}

pub fn run_reproduce_table() -> Result<i32> {
    let multimode = layout_grid(11, 11, 0.72f64.sqrt(), 0.58, 4)?;
    let crossed = layout_grid(11, 22, 0.5, 1.0, 2)?;
    let metrics = array_metrics(&multimode, &crossed);
    println!(
        "four-port multi-mode array: 11x11 elements, {} ports, element 0.72 wl^2, spacing 0.58 wl, total {:.0} wl^2",
        multimode.total_ports(),
        metrics.area
    );
    println!(
        "crossed-dipole reference:   11x22 elements, {} ports, element 0.25 wl^2, spacing 1.00 wl, total {:.0} wl^2",
        crossed.total_ports(),
        metrics.reference_area
    );
    let reduction = metrics
        .reduction_percent
        .ok_or_else(|| Error::NumericalFailure("port counts must match".into()))?;
    println!("size reduction: {:.0}% ({reduction:.2}% exact)", reduction.floor());
    Ok(0)
}
