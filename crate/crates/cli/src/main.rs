use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use astmesh::bench;
use astmesh::io::{self, SvgOptions};
use astmesh::overlay::overlay;
use astmesh::refinement::{check_quasi_uniformity, refine_traced, replay_bisections, Replay};
use astmesh::topology::{is_analysis_suitable, Suitability, Topology};
use astmesh::{ElementId, Mesh, MeshError, MeshParams};

#[derive(Parser)]
#[command(name = "astmesh", version, about = "Admissible refinement of analysis-suitable T-meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Shape {
    #[arg(long)]
    p: u32,
    #[arg(long)]
    q: u32,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    n: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyKind {
    Random,
    Corner,
}

#[derive(Subcommand)]
enum Command {
    /// Write the initial mesh of M x N unit squares.
    New {
        #[command(flatten)]
        shape: Shape,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Refine a mesh around marked elements.
    Refine {
        #[arg(long)]
        mesh: PathBuf,
        /// Marked elements, "l,i,j;l,i,j".
        #[arg(long)]
        mark: String,
        #[arg(short, long)]
        output: PathBuf,
        /// Print the bisection order.
        #[arg(long)]
        trace: bool,
    },
    /// Validate a mesh; with no flags all checks run.
    Check {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long = "as")]
        analysis_suitable: bool,
        #[arg(long)]
        admissible: bool,
        #[arg(long)]
        quasi_uniform: bool,
    },
    /// Coarsest common refinement of two meshes.
    Overlay {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// List T-junctions and their extensions.
    Extensions {
        #[arg(long)]
        mesh: PathBuf,
    },
    /// Write the uniform mesh of level k.
    Uniform {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        level: u32,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run seeded single-mark refinement sequences.
    Bench {
        #[arg(long, value_enum)]
        policy: PolicyKind,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 10)]
        m: u64,
        #[arg(long, default_value_t = 10)]
        n: u64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Draw a mesh as SVG.
    Render {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Pixels per index unit.
        #[arg(long, default_value_t = 50)]
        scale: u32,
        /// Elements to fill, "l,i,j;l,i,j".
        #[arg(long)]
        highlight: Option<String>,
        #[arg(long)]
        extensions: bool,
    },
}

enum Failure {
    Check(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<MeshError> for Failure {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::Parameter(_) | MeshError::ParameterMismatch => Failure::Usage(e.to_string()),
            MeshError::Json(_) | MeshError::UnsupportedFormat(_) => Failure::Io(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_mesh(path: &Path) -> Result<Mesh, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    // a file that does not describe a valid partition is a format error
    io::parse(&text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_mesh(path: &Path, mesh: &Mesh) -> Outcome {
    let mut text = io::serialize(mesh);
    text.push('\n');
    write_file(path, &text)
}

fn parse_elements(list: &str) -> Result<Vec<ElementId>, Failure> {
    list.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let parts: Vec<&str> = s.split(',').map(str::trim).collect();
            let bad = || Failure::Usage(format!("expected \"l,i,j\", got {s:?}"));
            if parts.len() != 3 {
                return Err(bad());
            }
            Ok(ElementId::new(
                parts[0].parse().map_err(|_| bad())?,
                parts[1].parse().map_err(|_| bad())?,
                parts[2].parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::New { shape, output } => {
            let mesh = Mesh::initial(shape.p, shape.q, shape.m, shape.n)?;
            write_mesh(&output, &mesh)
        }
        Command::Uniform {
            shape,
            level,
            output,
        } => {
            let mesh = Mesh::uniform(shape.p, shape.q, shape.m, shape.n, level)?;
            write_mesh(&output, &mesh)
        }
        Command::Refine {
            mesh,
            mark,
            output,
            trace,
        } => {
            let g = read_mesh(&mesh)?;
            let marks = parse_elements(&mark)?;
            let (refined, order) = refine_traced(&g, &marks)?;
            if trace {
                for k in &order {
                    println!("{k}");
                }
            }
            write_mesh(&output, &refined)
        }
        Command::Check {
            mesh,
            analysis_suitable,
            admissible,
            quasi_uniform,
        } => {
            let g = read_mesh(&mesh)?;
            let all = !(analysis_suitable || admissible || quasi_uniform);
            println!("partition: ok ({} elements)", g.len());
            let mut failed = false;
            if all || analysis_suitable {
                match is_analysis_suitable(&g) {
                    Ok(Suitability::Suitable) => println!("analysis-suitable: ok"),
                    Ok(Suitability::Crossing {
                        horizontal,
                        vertical,
                    }) => {
                        failed = true;
                        println!("analysis-suitable: FAIL, extensions of {horizontal} and {vertical} intersect");
                    }
                    Err(e) => {
                        failed = true;
                        println!("analysis-suitable: FAIL, {e}");
                    }
                }
            }
            if all || admissible {
                match replay_bisections(&g) {
                    Replay::Admissible(_) => println!("admissible: ok"),
                    Replay::Inadmissible { element, coarse } => {
                        failed = true;
                        println!("admissible: FAIL, bisecting {element} with {coarse} in its patch");
                    }
                }
            }
            if all || quasi_uniform {
                match check_quasi_uniformity(&g) {
                    Ok(()) => println!("quasi-uniform: ok"),
                    Err(j) => {
                        failed = true;
                        println!("quasi-uniform: FAIL, patch of {} holds {}", j.element, j.coarse);
                    }
                }
            }
            if failed {
                Err(Failure::Check("mesh failed checks".into()))
            } else {
                Ok(())
            }
        }
        Command::Overlay { a, b, output } => {
            let ga = read_mesh(&a)?;
            let gb = read_mesh(&b)?;
            write_mesh(&output, &overlay(&ga, &gb)?)
        }
        Command::Extensions { mesh } => {
            let g = read_mesh(&mesh)?;
            let topo = Topology::new(&g);
            for e in topo.extensions()? {
                println!(
                    "{} {}  edge {}  face {}",
                    e.junction.kind.symbol(),
                    e.junction.node,
                    e.edge,
                    e.face
                );
            }
            Ok(())
        }
        Command::Bench {
            policy,
            p,
            q,
            m,
            n,
            steps,
            runs,
            seed,
            csv,
        } => {
            let params = MeshParams::new(p, q, m, n)?;
            if runs == 0 {
                return Err(Failure::Usage("--runs must be at least 1".into()));
            }
            let c = bench::complexity_constant(p, q);
            match policy {
                PolicyKind::Random => {
                    let summary = bench::experiment_random(params, steps, runs, seed)?;
                    write_file(&csv, &bench::csv(summary.runs.iter().map(|(_, s)| s)))?;
                    println!("runs: {runs}, steps: {steps}");
                    println!("max #G_J/J: {:.4}", summary.max_ratio);
                    println!("median #G_J/J: {:.4}", summary.median_ratio);
                    let ok = summary
                        .runs
                        .iter()
                        .all(|(_, s)| bench::check_complexity_bound(s, p, q));
                    println!("C_{{p,q}}: {c:.1}, bound holds: {ok}");
                }
                PolicyKind::Corner => {
                    let summary = bench::experiment_corner(params, steps)?;
                    write_file(&csv, &bench::csv([&summary.stats]))?;
                    println!("steps: {steps}");
                    println!(
                        "max generated/marked: {} (step {})",
                        summary.max_ratio, summary.argmax_step
                    );
                    let ok = bench::check_complexity_bound(&summary.stats, p, q);
                    println!("C_{{p,q}}: {c:.1}, bound holds: {ok}");
                }
            }
            Ok(())
        }
        Command::Render {
            mesh,
            output,
            scale,
            highlight,
            extensions,
        } => {
            let g = read_mesh(&mesh)?;
            if scale == 0 {
                return Err(Failure::Usage("--scale must be positive".into()));
            }
            let highlight = match highlight {
                Some(list) => parse_elements(&list)?,
                None => Vec::new(),
            };
            let svg = io::render_svg(
                &g,
                &SvgOptions {
                    scale,
                    highlight,
                    extensions,
                },
            );
            write_file(&output, &svg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
