use anyhow::{anyhow, bail, Context, Result};
use cbnufft::analysis::{angular_sweep, masked_error_metrics, zero_corner_frequencies, ErrorMetrics};
use cbnufft::baseline::{ct_project_linear, fdk_reconstruct};
use cbnufft::geometry::ConeGeometry;
use cbnufft::io;
use cbnufft::phantom::{interior_mask_projections, interior_mask_volume, random_image, shepp_logan_slice, Phantom};
use cbnufft::pipeline::{
    count_multiplications, predicted_cost, speedup, CostVariant, NufftProjector, ProjectorConfig, VoxelBasis,
};
use cbnufft::resampling::ResampleMethod;
use cbnufft::volume::{Image2D, Volume3D};
use clap::{Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cbnufft", version, about = "NUFFT cone-beam CT projector toolkit")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "CBNUFFT_THREADS")]
    threads: Option<usize>,
    /// Seed for randomized test images.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a voxelized phantom volume.
    Phantom {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = PhantomKind::SheppLogan)]
        kind: PhantomKind,
        /// Sub-samples per voxel axis.
        #[arg(long, default_value_t = 1)]
        supersample: usize,
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the central axial slice as 16-bit PGM.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Forward project a volume.
    Project {
        #[arg(long, value_enum)]
        method: ProjectMethod,
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Calibrate the NUFFT normalization on a centred ball first.
        #[arg(long)]
        calibrate: bool,
        #[arg(long, value_enum, default_value_t = Basis::Sinc)]
        basis: Basis,
    },
    /// NUFFT backprojection of projection data.
    Backproject {
        #[arg(long, value_enum, default_value_t = NufftMethod::NufftB)]
        method: NufftMethod,
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// FDK reconstruction of projection data.
    Fdk {
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Angular sampling sweep of 2D direct Fourier reconstruction.
    Sweep {
        /// Square binary PGM; overrides --image-kind.
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ImageKind::SheppLogan)]
        image_kind: ImageKind,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, default_value_t = 256)]
        n_rho: usize,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,192,200,224,256,320,384")]
        n_theta: Vec<usize>,
        /// Drop frequencies outside the inscribed disk first.
        #[arg(long)]
        zero_corners: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form and instrumented multiplication counts.
    Complexity {
        #[arg(long, value_delimiter = ',', default_value = "512")]
        n: Vec<usize>,
        /// Largest N for which an instrumented run is made.
        #[arg(long, default_value_t = 32)]
        max_instrumented: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error metrics between two volumes or two projection sets.
    Compare {
        /// Data under test.
        #[arg(long)]
        a: PathBuf,
        /// Reference; the interior mask is taken from its support.
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = MaskKind::Interior)]
        mask: MaskKind,
        /// Erosion in pixels or voxels; defaults to 2 for projections, 3 for volumes.
        #[arg(long)]
        erosion: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PhantomKind {
    SheppLogan,
    Ball,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProjectMethod {
    NufftA,
    NufftB,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum NufftMethod {
    NufftA,
    NufftB,
}

#[derive(Clone, Copy, ValueEnum)]
enum Basis {
    Sinc,
    Trilinear,
}

#[derive(Clone, Copy, ValueEnum)]
enum ImageKind {
    SheppLogan,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum MaskKind {
    Interior,
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<cbnufft::Error>(), Some(cbnufft::Error::NonFinite(_))));
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}

fn load_geometry(path: Option<&Path>) -> Result<ConeGeometry<f64>> {
    match path {
        Some(p) => Ok(io::read_geometry(p).with_context(|| format!("reading geometry {}", p.display()))?),
        None => Ok(ConeGeometry::reference()),
    }
}

fn nufft_method(m: NufftMethod) -> ResampleMethod {
    match m {
        NufftMethod::NufftA => ResampleMethod::A,
        NufftMethod::NufftB => ResampleMethod::B,
    }
}

fn central_slice(v: &Volume3D<f64>) -> Image2D<f64> {
    v.slice_z(v.n / 2)
}

fn write_volume_outputs(v: &Volume3D<f64>, out: &Path, pgm: Option<&Path>) -> Result<()> {
    io::write_volume(out, v)?;
    if let Some(p) = pgm {
        io::write_pgm16(p, &central_slice(v))?;
    }
    Ok(())
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Phantom {
            n,
            kind,
            supersample,
            geometry,
            out,
            pgm,
        } => {
            if n == 0 || supersample == 0 {
                bail!(cbnufft::Error::Invalid {
                    field: "n",
                    reason: "size and supersampling must be positive".into()
                });
            }
            let g = load_geometry(geometry.as_deref())?;
            let ext = g.object_extent_mm;
            let ph = match kind {
                PhantomKind::SheppLogan => Phantom::shepp_logan(ext),
                PhantomKind::Ball => Phantom::ball(ext / 4.0, 1.0),
            };
            let v = ph.voxelize_supersampled(n, ext / n as f64, supersample);
            write_volume_outputs(&v, &out, pgm.as_deref())
        }
        Cmd::Project {
            method,
            geometry,
            input,
            out,
            calibrate,
            basis,
        } => {
            let g = load_geometry(geometry.as_deref())?;
            let vol: Volume3D<f64> = io::read_volume(&input).with_context(|| format!("reading {}", input.display()))?;
            let p = match method {
                ProjectMethod::Linear => ct_project_linear(&vol, &g)?,
                ProjectMethod::NufftA | ProjectMethod::NufftB => {
                    let m = if method == ProjectMethod::NufftA {
                        ResampleMethod::A
                    } else {
                        ResampleMethod::B
                    };
                    let mut cfg = ProjectorConfig::practical(vol.n, &g, m);
                    cfg.basis = match basis {
                        Basis::Sinc => VoxelBasis::Sinc,
                        Basis::Trilinear => VoxelBasis::Trilinear,
                    };
                    let mut proj = NufftProjector::new(&g, vol.n, cfg)?;
                    if calibrate {
                        let s = proj.calibrate()?;
                        eprintln!("normalization {s:.6}");
                    }
                    proj.forward_project(&vol)?
                }
            };
            io::write_projections(&out, &p, Some(&g))?;
            Ok(())
        }
        Cmd::Backproject {
            method,
            geometry,
            input,
            n,
            out,
            pgm,
        } => {
            let (p, echo) = io::read_projections::<f64>(&input)?;
            let g = match geometry {
                Some(path) => load_geometry(Some(&path))?,
                None => echo.unwrap_or_else(ConeGeometry::reference),
            };
            let proj = NufftProjector::new(&g, n, ProjectorConfig::practical(n, &g, nufft_method(method)))?;
            let v = proj.backproject(&p)?;
            write_volume_outputs(&v, &out, pgm.as_deref())
        }
        Cmd::Fdk {
            geometry,
            input,
            n,
            out,
            pgm,
        } => {
            let (p, echo) = io::read_projections::<f64>(&input)?;
            let g = match geometry {
                Some(path) => load_geometry(Some(&path))?,
                None => echo.unwrap_or_else(ConeGeometry::reference),
            };
            let v = fdk_reconstruct(&p, &g, n)?;
            write_volume_outputs(&v, &out, pgm.as_deref())
        }
        Cmd::Sweep {
            image,
            image_kind,
            size,
            n_rho,
            n_theta,
            zero_corners,
            out,
        } => {
            let mut img: Image2D<f64> = match (&image, image_kind) {
                (Some(p), _) => io::read_pgm(p)?,
                (None, ImageKind::SheppLogan) => shepp_logan_slice(size),
                (None, ImageKind::Random) => random_image(size, cli.seed),
            };
            if zero_corners {
                img = zero_corner_frequencies(&img);
            }
            let r = angular_sweep(&img, &n_theta, n_rho)?;
            let mut csv = String::from("n_theta,error\n");
            for (nt, e) in &r.points {
                writeln!(csv, "{nt},{e:.9e}")?;
            }
            write_text(out.as_deref(), &csv)?;
            eprintln!("plateau {}", r.plateau);
            Ok(())
        }
        Cmd::Complexity {
            n,
            max_instrumented,
            out,
        } => {
            let mut csv = String::from("n,variant,step,predicted,measured,ratio\n");
            for &size in &n {
                for v in [CostVariant::MethodA, CostVariant::MethodB, CostVariant::CtBaseline] {
                    let p = predicted_cost(size, v)?;
                    let m = if size <= max_instrumented {
                        Some(count_multiplications(size, v)?)
                    } else {
                        None
                    };
                    let name = variant_name(v);
                    let ms = m.as_ref().map(|m| m.steps());
                    let mut rows: Vec<(&str, f64, Option<f64>)> = p
                        .steps()
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.1 > 0.0)
                        .map(|(i, s)| (s.0, s.1, ms.map(|x| x[i].1)))
                        .collect();
                    rows.push(("total", p.total(), m.as_ref().map(|m| m.total())));
                    for (step, pred, meas) in rows {
                        match meas {
                            Some(x) => writeln!(csv, "{size},{name},{step},{pred:.6e},{x:.6e},{:.6}", x / pred)?,
                            None => writeln!(csv, "{size},{name},{step},{pred:.6e},,")?,
                        }
                    }
                }
                eprintln!(
                    "N={size}: baseline/method_a = {:.4}, baseline/method_b = {:.4}",
                    speedup(size, CostVariant::MethodA)?,
                    speedup(size, CostVariant::MethodB)?
                );
            }
            write_text(out.as_deref(), &csv)
        }
        Cmd::Compare {
            a,
            b,
            mask,
            erosion,
            out,
        } => {
            let m = compare_files(&a, &b, mask, erosion)?;
            let csv = format!(
                "name,value\nmean_abs,{:.9e}\nrmse,{:.9e}\nmax_abs,{:.9e}\nmean_signal,{:.9e}\ncount,{}\n",
                m.mean_abs, m.rmse, m.max_abs, m.mean_signal, m.count
            );
            write_text(out.as_deref(), &csv)
        }
    }
}

fn variant_name(v: CostVariant) -> &'static str {
    match v {
        CostVariant::MethodA => "method_a",
        CostVariant::MethodB => "method_b",
        CostVariant::CtBaseline => "ct_baseline",
    }
}

fn is_volume(path: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(io::sidecar_path(path))
        .with_context(|| format!("reading sidecar of {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| cbnufft::Error::Sidecar {
        field: "<root>".into(),
        reason: e.to_string(),
    })?;
    Ok(v.get("voxel_mm").is_some())
}

fn compare_files(a: &Path, b: &Path, mask: MaskKind, erosion: Option<usize>) -> Result<ErrorMetrics> {
    let vol = is_volume(b)?;
    if vol != is_volume(a)? {
        return Err(anyhow!(cbnufft::Error::Invalid {
            field: "a",
            reason: "compared files must both be volumes or both projections".into()
        }));
    }
    if vol {
        let va: Volume3D<f64> = io::read_volume(a)?;
        let vb: Volume3D<f64> = io::read_volume(b)?;
        let m = match mask {
            MaskKind::Interior => interior_mask_volume(&vb, erosion.unwrap_or(3)),
            MaskKind::All => vec![true; vb.data.len()],
        };
        Ok(masked_error_metrics(&va.data, &vb.data, &m)?)
    } else {
        let (pa, _) = io::read_projections::<f64>(a)?;
        let (pb, _) = io::read_projections::<f64>(b)?;
        let m = match mask {
            MaskKind::Interior => interior_mask_projections(&pb, erosion.unwrap_or(2)),
            MaskKind::All => vec![true; pb.data.len()],
        };
        Ok(masked_error_metrics(&pa.data, &pb.data, &m)?)
    }
}
