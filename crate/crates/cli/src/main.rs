use std::f64::consts::TAU;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ectomo::analysis::{
    audit_normalization, classify_strands, compare_with_oracle, find_ridges, oracle_state, q_curve, OracleSweep,
    DEFAULT_RIDGE_THRESHOLD,
};
use ectomo::fock::{entanglement_entropy, Parity, TruncationSpec};
use ectomo::grid_io::{write_csv, write_pgm, write_q_curve};
use ectomo::quad::{linspace, phase_axis};
use ectomo::tomography::{
    conditional_coefficients, conditional_mandel_q, conditional_tomogram, mode_tomogram, CatSource, CoherentSource,
    QuadraturePoint, TomogramGrid, TwoModeSource,
};
use ectomo::Error;

const ORACLE_TOLERANCE: f64 = 1e-7;
const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "ectomo", version, about = "Optical tomograms of entangled coherent states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mode-c marginal tomogram of the beam-splitter output
    Tomogram {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mode-c tomogram conditioned on a mode-d quadrature outcome, with strand verdict
    Conditional {
        #[command(flatten)]
        source: SourceArgs,
        /// Measured mode-d quadrature value
        #[arg(long, allow_hyphen_values = true)]
        x2: f64,
        /// Mode-d local-oscillator phase
        #[arg(long, allow_hyphen_values = true)]
        theta2: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mandel Q of the conditional state over relative phases φ = θ₂ − δ in [0, 2π]
    Qcurve {
        #[command(flatten)]
        cat: CatArgs,
        #[arg(long, allow_hyphen_values = true)]
        x2: f64,
        #[arg(long, default_value_t = 721)]
        phi_steps: usize,
        /// CSV file for the (phi, Q) samples
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entanglement entropy of the output state in bits
    Entropy {
        #[command(flatten)]
        cat: CatArgs,
        /// Fock cutoff per mode [default: sized from --alpha-sq]
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Check closed forms against the Fock-space route and grid normalization
    Validate {
        #[command(flatten)]
        cat: CatArgs,
        /// Fock cutoff per mode [default: sized from --alpha-sq]
        #[arg(long)]
        dim: Option<usize>,
    },
}

#[derive(Args)]
struct CatArgs {
    /// Mean photon number |α|² of the input cat state
    #[arg(long)]
    alpha_sq: f64,
    /// Phase δ of α
    #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
    delta: f64,
    /// Cat parity: 0 even, 1 odd
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    h: u8,
}

#[derive(Args)]
struct SourceArgs {
    #[command(flatten)]
    cat: CatArgs,
    /// Use a coherent input instead of a cat (separable output)
    #[arg(long)]
    coherent: bool,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 128)]
    theta1_steps: usize,
    #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
    x1_min: f64,
    #[arg(long, default_value_t = 8.0, allow_hyphen_values = true)]
    x1_max: f64,
    #[arg(long, default_value_t = 321)]
    x1_steps: usize,
}

#[derive(Args)]
struct OutputArgs {
    /// Grid file to write
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Pgm,
}

enum Failure {
    Usage(String),
    Degenerate(String),
    Validation,
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            Error::TruncationTooSmall { .. } => Failure::Usage(format!("{e}; raise --dim")),
            Error::DegenerateProjection { .. } => Failure::Degenerate(format!(
                "{e}; the conditioning outcome is too improbable, move --x2 closer to the strands"
            )),
            other => Failure::Other(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl CatArgs {
    fn validate(&self) -> Outcome {
        if !(self.alpha_sq >= 0.0 && self.alpha_sq.is_finite()) {
            return Err(usage(format!("--alpha-sq must be a finite number >= 0, got {}", self.alpha_sq)));
        }
        if !self.delta.is_finite() {
            return Err(usage("--delta must be finite"));
        }
        Ok(())
    }

    fn source(&self) -> Result<CatSource, Failure> {
        self.validate()?;
        Ok(CatSource::new(self.alpha_sq, self.delta, Parity::from_index(self.h)?)?)
    }

    fn spec(&self, dim: Option<usize>) -> Result<TruncationSpec, Failure> {
        match dim {
            None => Ok(TruncationSpec::for_alpha_sq(self.alpha_sq)),
            Some(d) => Ok(TruncationSpec::new(d, TruncationSpec::DEFAULT_TAIL_TOL)?),
        }
    }
}

impl SourceArgs {
    fn build(&self) -> Result<Box<dyn TwoModeSource>, Failure> {
        if self.coherent {
            self.cat.validate()?;
            Ok(Box::new(CoherentSource::new(self.cat.alpha_sq, self.cat.delta)?))
        } else {
            Ok(Box::new(self.cat.source()?))
        }
    }

    fn describe(&self) {
        println!("source={}", if self.coherent { "separable" } else { "entangled" });
        println!("alpha_sq={}", self.cat.alpha_sq);
        println!("delta={}", self.cat.delta);
        if !self.coherent {
            println!("h={}", self.cat.h);
        }
    }
}

impl GridArgs {
    fn axes(&self) -> Result<(Vec<f64>, Vec<f64>), Failure> {
        if self.theta1_steps < 2 {
            return Err(usage(format!("--theta1-steps must be at least 2, got {}", self.theta1_steps)));
        }
        if self.x1_steps < 2 {
            return Err(usage(format!("--x1-steps must be at least 2, got {}", self.x1_steps)));
        }
        if self.x1_min >= self.x1_max || !self.x1_min.is_finite() || !self.x1_max.is_finite() {
            return Err(usage(format!("--x1-min must be below --x1-max, got {} and {}", self.x1_min, self.x1_max)));
        }
        Ok((phase_axis(self.theta1_steps), linspace(self.x1_min, self.x1_max, self.x1_steps)))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::Other(format!("cannot create {}: {e}", path.display())))
}

fn save_grid(grid: &TomogramGrid, output: &OutputArgs) -> Outcome {
    if let Some(path) = &output.out {
        let file = create(path)?;
        match output.format {
            Format::Csv => write_csv(grid, file)?,
            Format::Pgm => write_pgm(grid, file)?,
        }
        println!("written={}", path.display());
    }
    Ok(())
}

fn tomogram(source: &SourceArgs, grid: &GridArgs, output: &OutputArgs) -> Outcome {
    let src = source.build()?;
    let (thetas, xs) = grid.axes()?;
    let tomo = mode_tomogram(src.as_ref(), &thetas, &xs)?;
    source.describe();
    print!("{}", audit_normalization(&tomo));
    save_grid(&tomo, output)
}

fn conditional(source: &SourceArgs, x2: f64, theta2: f64, grid: &GridArgs, output: &OutputArgs) -> Outcome {
    if !x2.is_finite() || !theta2.is_finite() {
        return Err(usage("--x2 and --theta2 must be finite"));
    }
    let src = source.build()?;
    let (thetas, xs) = grid.axes()?;
    let p2 = QuadraturePoint::new(x2, theta2);
    let tomo = conditional_tomogram(src.as_ref(), p2, &thetas, &xs)?;
    let verdict = classify_strands(&find_ridges(&tomo, DEFAULT_RIDGE_THRESHOLD)?);
    source.describe();
    println!("x2={x2}");
    println!("theta2={theta2}");
    if !source.coherent {
        let state = conditional_coefficients(&source.cat.source()?, p2)?;
        println!("mandel_q={:e}", conditional_mandel_q(&state)?);
    }
    print!("{verdict}");
    print!("{}", audit_normalization(&tomo));
    save_grid(&tomo, output)
}

fn qcurve(cat: &CatArgs, x2: f64, phi_steps: usize, out: Option<&Path>) -> Outcome {
    if phi_steps < 2 {
        return Err(usage(format!("--phi-steps must be at least 2, got {phi_steps}")));
    }
    if !x2.is_finite() {
        return Err(usage("--x2 must be finite"));
    }
    let src = cat.source()?;
    let mut points = Vec::with_capacity(phi_steps);
    for p in q_curve(&src, x2, &linspace(0.0, TAU, phi_steps)) {
        match p.q {
            Ok(q) => points.push((p.phi, q)),
            Err(e @ Error::DegenerateProjection { .. }) => {
                return Err(Failure::Degenerate(format!("{e} at phi={}; move --x2 closer to the strands", p.phi)))
            }
            Err(e) => return Err(e.into()),
        }
    }
    let (max, min) = points.iter().fold(((0.0, f64::NEG_INFINITY), (0.0, f64::INFINITY)), |(hi, lo), &p| {
        (if p.1 > hi.1 { p } else { hi }, if p.1 < lo.1 { p } else { lo })
    });
    println!("alpha_sq={}", cat.alpha_sq);
    println!("delta={}", cat.delta);
    println!("h={}", cat.h);
    println!("x2={x2}");
    println!("points={}", points.len());
    println!("q_max={:e}", max.1);
    println!("phi_at_q_max={:.6}", max.0);
    println!("q_min={:e}", min.1);
    println!("phi_at_q_min={:.6}", min.0);
    if let Some(path) = out {
        write_q_curve(&points, create(path)?)?;
        println!("written={}", path.display());
    }
    Ok(())
}

fn entropy(cat: &CatArgs, dim: Option<usize>) -> Outcome {
    let src = cat.source()?;
    let spec = cat.spec(dim)?;
    let bits = entanglement_entropy(&oracle_state(&src, &spec)?)?;
    println!("alpha_sq={}", cat.alpha_sq);
    println!("h={}", cat.h);
    println!("fock_dim={}", spec.dim());
    println!("entropy_bits={bits:.12}");
    Ok(())
}

fn validate(cat: &CatArgs, dim: Option<usize>) -> Outcome {
    let src = cat.source()?;
    let spec = cat.spec(dim)?;
    let oracle = compare_with_oracle(&src, &OracleSweep::default(), &spec)?;
    let grid = mode_tomogram(&src, &phase_axis(64), &linspace(-14.0, 14.0, 561))?;
    let norm = audit_normalization(&grid);
    let pass = oracle.max_abs_diff < ORACLE_TOLERANCE && norm.max_column_error < NORMALIZATION_TOLERANCE;
    print!("{oracle}");
    print!("{norm}");
    println!("status={}", if pass { "pass" } else { "fail" });
    if pass {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Tomogram { source, grid, output } => tomogram(source, grid, output),
        Command::Conditional { source, x2, theta2, grid, output } => conditional(source, *x2, *theta2, grid, output),
        Command::Qcurve { cat, x2, phi_steps, out } => qcurve(cat, *x2, *phi_steps, out.as_deref()),
        Command::Entropy { cat, dim } => entropy(cat, *dim),
        Command::Validate { cat, dim } => validate(cat, *dim),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Degenerate(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
