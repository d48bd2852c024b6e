//! Case pipeline and catalog runner behind the command-line tool.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::assembly::{assemble_with, kron_compare, AssemblyOptions, LinearSystem};
use crate::config::{parse_case, Axis, BoundaryKind, CaseConfig};
use crate::error::{Error, Result};
use crate::mesh::{lattice_for, Lattice};
use crate::report::{self, EncoderStats, FableEntry, PauliEntry, RunStats};
use crate::reorder::{permute_system, recover_solution, shell_order};
use crate::{fable, linalg, pauli};

pub const USAGE: &str = "\
lapenc -i <input file> {-c <x,y,z>} {-d} {-e} {-h} {-j} {-m} {-r} {-s}
       {--pauli} {--fable} {--tol <real>} {--shear-retaining} {--kron-compare}

     -i {name of input file}
     -c {x,y,z} cut slice of 3D solution to be written, default = x
     -d allow degenerate matrices, default = False
     -e calculate eigenvalues and condition number, default = False
     -h help menu
     -j write mesh and solution to separate files, default is one file
     -m write matrix sparsity pattern and values, default = False
     -r reorder matrix and RHS to use shell ordering of mesh, default = False
     -s write solution and mesh, default = False
     --pauli            Prepare-Select Pauli-string analysis
     --fable            FABLE rotation-count analysis
     --tol <real>       coefficient/angle tolerance, default = 1e-9
     --shear-retaining  keep transverse couplings on Neumann rows
     --kron-compare     compare with the Kronecker sum of 1D operators
";

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub slice: Axis,
    pub allow_degenerate: bool,
    pub eigen: bool,
    pub split: bool,
    pub matrix_plot: bool,
    pub reorder: bool,
    pub solution_plot: bool,
    pub pauli: bool,
    pub fable: bool,
    pub tol: f64,
    pub shear_retaining: bool,
    pub kron_compare: bool,
}

impl RunOptions {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        RunOptions {
            input: input.into(),
            out_dir: out_dir.into(),
            slice: Axis::X,
            allow_degenerate: false,
            eigen: false,
            split: false,
            matrix_plot: false,
            reorder: false,
            solution_plot: false,
            pauli: false,
            fable: false,
            tol: pauli::DEFAULT_TOL,
            shear_retaining: false,
            kron_compare: false,
        }
    }
}

/// Warnings worth showing the user about a case.
pub fn warnings(cfg: &CaseConfig) -> Vec<String> {
    cfg.meshes
        .iter()
        .filter(|m| m.btype[0] == BoundaryKind::Repeat && m.cratio > 1.0)
        .map(|m| {
            format!(
                "direction {} is Repeat with clustering ratio {}; wrap spacing uses the opposite end cell",
                m.direction, m.cratio
            )
        })
        .collect()
}

fn timed<T>(timings: &mut Vec<(String, f64)>, name: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    timings.push((name.to_string(), t.elapsed().as_secs_f64()));
    out
}

/// Run the enabled encoders on one matrix.
pub fn encode(
    sys: &LinearSystem,
    do_pauli: bool,
    do_fable: bool,
    tol: f64,
) -> Result<(EncoderStats, Option<pauli::PauliDecomposition>)> {
    let mut out = EncoderStats::default();
    let mut decomp = None;
    if do_pauli {
        let t = Instant::now();
        let (d, s) = pauli::analyze(&sys.matrix, tol)?;
        out.pauli = Some(PauliEntry {
            strings: s.num_strings,
            qubits: s.total_qubits,
            normalized_count: s.normalized_count,
            hermitized: s.hermitized,
            seconds: t.elapsed().as_secs_f64(),
        });
        decomp = Some(d);
    }
    if do_fable {
        let t = Instant::now();
        let s = fable::fable_stats(&sys.matrix, tol)?;
        out.fable = Some(FableEntry {
            rotations: s.num_rotations,
            qubits: s.total_qubits,
            normalized_count: s.normalized_count,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    Ok((out, decomp))
}

/// Nodal solution on the mid-plane normal to `axis` (whole field below 3D),
/// as `x,y,z,phi` rows.
pub fn solution_csv(lat: &Lattice, phi: &[f64], axis: Axis) -> String {
    let mut s = String::from("x,y,z,phi\n");
    let k = axis.index();
    let mid = if lat.dim() == 3 { Some(lat.dims[k] / 2) } else { None };
    for (i, v) in phi.iter().enumerate() {
        let c = lat.coord(i);
        if mid.is_some_and(|m| c[k] != m) {
            continue;
        }
        let x: Vec<f64> = (0..3)
            .map(|d| if d < lat.dim() { lat.meshes[d].coords[c[d]] } else { 0.0 })
            .collect();
        s.push_str(&format!("{:?},{:?},{:?},{:?}\n", x[0], x[1], x[2], v));
    }
    s
}

fn mesh_csv(lat: &Lattice) -> String {
    let series: Vec<(String, f64, f64)> = lat
        .meshes
        .iter()
        .flat_map(|m| {
            m.coords
                .iter()
                .enumerate()
                .map(move |(i, &x)| (m.spec.direction.to_string(), i as f64, x))
        })
        .collect();
    report::plot_csv(&series)
}

/// Full pipeline for one case file. Returns the stats document written to
/// `<stem>_stats.json`.
pub fn run(opts: &RunOptions) -> Result<RunStats> {
    let text = std::fs::read_to_string(&opts.input)?;
    let cfg = parse_case(&text)?;
    run_config(&cfg, opts)
}

pub fn run_config(cfg: &CaseConfig, opts: &RunOptions) -> Result<RunStats> {
    for w in warnings(cfg) {
        eprintln!("warning: {w}");
    }
    let mut timings = Vec::new();
    let lat = timed(&mut timings, "mesh", || lattice_for(cfg))?;
    let aopts = AssemblyOptions { shear_retaining: opts.shear_retaining, ..Default::default() };
    let sys = timed(&mut timings, "assemble", || assemble_with(&lat, cfg, opts.allow_degenerate, aopts))?;
    let stem = report::stem(&cfg.name, sys.degenerate, opts.reorder);
    std::fs::create_dir_all(&opts.out_dir)?;
    let path = |suffix: &str| opts.out_dir.join(format!("{stem}{suffix}"));
    let mut files = Vec::new();
    let mut save = |p: PathBuf, bytes: Vec<u8>| -> Result<()> {
        std::fs::write(&p, bytes)?;
        files.push(p.file_name().unwrap().to_string_lossy().into_owned());
        Ok(())
    };

    let perm = opts.reorder.then(|| shell_order(&lat.dims));
    let work = match &perm {
        Some(p) => permute_system(&sys, p)?,
        None => sys.clone(),
    };

    let kappa = if opts.eigen && !work.degenerate {
        Some(timed(&mut timings, "eigen", || linalg::condition_number(&work))?)
    } else {
        None
    };

    save(path("_mat.bin"), report::encode_matrix(&work.matrix))?;
    save(path("_rhs.bin"), report::encode_vector(&work.rhs))?;
    if let Some(p) = &perm {
        save(path("_ord.bin"), report::encode_permutation(&p.pi))?;
    }
    if !work.degenerate {
        let phi = timed(&mut timings, "solve", || linalg::solve(&work))?;
        save(path("_sol.bin"), report::encode_vector(&phi))?;
        if opts.solution_plot {
            let phi = match &perm {
                Some(p) => recover_solution(p, &phi)?,
                None => phi,
            };
            let sol = solution_csv(&lat, &phi, opts.slice);
            if opts.split {
                save(path("_sol.csv"), sol.into_bytes())?;
                save(path("_mesh.csv"), mesh_csv(&lat).into_bytes())?;
            } else {
                save(path("_sol.csv"), format!("{sol}\n{}", mesh_csv(&lat)).into_bytes())?;
            }
        }
    }
    if opts.matrix_plot {
        save(path("_spy.svg"), report::sparsity_svg(&work.matrix).into_bytes())?;
        if opts.split || lat.n() <= 64 {
            let vals: Vec<(String, f64, f64)> = work
                .matrix
                .triplets()
                .map(|(i, j, v)| (format!("{i}:{j}"), j as f64, v))
                .collect();
            save(path("_vals.csv"), report::plot_csv(&vals).into_bytes())?;
        }
    }
    if opts.kron_compare {
        let (_, _, rows) = timed(&mut timings, "kron_compare", || kron_compare(&lat, cfg, aopts))?;
        let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
        save(path("_kron_diff.txt"), text.into_bytes())?;
    }

    let encode_on = opts.pauli || opts.fable;
    let mut original = EncoderStats::default();
    let mut reordered = None;
    if encode_on {
        let (o, d) = timed(&mut timings, "encode", || encode(&sys, opts.pauli, opts.fable, opts.tol))?;
        if let (Some(d), false) = (&d, opts.reorder) {
            save(path("_pauli.txt"), d.to_text().into_bytes())?;
        }
        original = o;
        if perm.is_some() {
            let (r, d) = timed(&mut timings, "encode_reordered", || encode(&work, opts.pauli, opts.fable, opts.tol))?;
            if let Some(d) = d {
                save(path("_pauli.txt"), d.to_text().into_bytes())?;
            }
            reordered = Some(r);
        }
    }

    let mut stats = RunStats {
        case: cfg.name.clone(),
        dimension: cfg.dimension,
        n: lat.n(),
        nnz: sys.matrix.nnz(),
        degenerate: sys.degenerate,
        scale: sys.scale,
        kappa,
        original,
        reordered,
        timings,
        files,
    };
    stats.files.push(format!("{stem}_stats.json"));
    let json = serde_json::to_string_pretty(&report::emit_stats(&stats)).expect("json");
    std::fs::write(path("_stats.json"), json + "\n")?;
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogOptions {
    /// Largest N for which the condition number is computed.
    pub kappa_cap: usize,
    /// Largest N for which the encoders run.
    pub encoder_cap: usize,
    pub tol: f64,
    pub workers: usize,
}

impl Default for CatalogOptions {
    fn default() -> Self {
        CatalogOptions { kappa_cap: 1024, encoder_cap: 4096, tol: pauli::DEFAULT_TOL, workers: 4 }
    }
}

/// One catalog result row.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogRow {
    pub case: String,
    pub degenerate: bool,
    pub stats: std::result::Result<RunStats, String>,
}

pub const CATALOG_HEADER: &str = "case,degenerate,n,nnz,kappa,pauli_strings,pauli_qubits,pauli_normalized,pauli_seconds,fable_rotations,fable_qubits,fable_normalized,fable_seconds,status";

impl CatalogRow {
    pub fn csv(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        match &self.stats {
            Ok(s) => {
                let p = s.original.pauli.as_ref();
                let f = s.original.fable.as_ref();
                [
                    s.case.clone(),
                    s.degenerate.to_string(),
                    s.n.to_string(),
                    s.nnz.to_string(),
                    opt(s.kappa.map(|k| format!("{k:.4}"))),
                    opt(p.map(|p| p.strings.to_string())),
                    opt(p.map(|p| p.qubits.to_string())),
                    opt(p.map(|p| format!("{:.6}", p.normalized_count))),
                    opt(p.map(|p| format!("{:.3}", p.seconds))),
                    opt(f.map(|f| f.rotations.to_string())),
                    opt(f.map(|f| f.qubits.to_string())),
                    opt(f.map(|f| format!("{:.6}", f.normalized_count))),
                    opt(f.map(|f| format!("{:.3}", f.seconds))),
                    "ok".into(),
                ]
                .join(",")
            }
            Err(e) => format!("{},{},,,,,,,,,,,,error: {}", self.case, self.degenerate, e.replace(',', ";")),
        }
    }
}

/// Case files of a catalog directory, sorted by name.
pub fn catalog_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "xml"))
        .collect();
    v.sort();
    Ok(v)
}

/// Run every case of a catalog: the pinned form, and for degenerate cases also
/// the degenerate form. Failures are recorded per row.
pub fn run_catalog(dir: &Path, out_dir: &Path, copts: CatalogOptions) -> Result<Vec<CatalogRow>> {
    std::fs::create_dir_all(out_dir)?;
    let files = catalog_files(dir)?;
    let mut jobs = Vec::new();
    for f in &files {
        match std::fs::read_to_string(f).map_err(Error::from).and_then(|t| parse_case(&t)) {
            Ok(cfg) => {
                jobs.push((f.clone(), Ok(cfg.clone()), false));
                if cfg.is_degenerate() {
                    jobs.push((f.clone(), Ok(cfg), true));
                }
            }
            Err(e) => jobs.push((f.clone(), Err(e.to_string()), false)),
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(copts.workers.max(1))
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|(f, cfg, degenerate)| {
                let name = f.file_stem().unwrap().to_string_lossy().into_owned();
                let stats = match cfg {
                    Err(e) => Err(e.clone()),
                    Ok(cfg) => {
                        let n: usize = cfg.meshes.iter().map(|m| m.ntotal).product();
                        let mut o = RunOptions::new(f, out_dir);
                        o.allow_degenerate = *degenerate;
                        o.eigen = n <= copts.kappa_cap;
                        let encodable = n <= copts.encoder_cap && n.is_power_of_two();
                        o.pauli = encodable;
                        o.fable = encodable;
                        o.tol = copts.tol;
                        run_config(cfg, &o).map_err(|e| e.to_string())
                    }
                };
                CatalogRow { case: name, degenerate: *degenerate, stats }
            })
            .collect::<Vec<_>>()
    });
    Ok(rows)
}

pub fn catalog_csv(rows: &[CatalogRow]) -> String {
    let mut s = format!("{CATALOG_HEADER}\n");
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE: &str = r#"<laplace>
  <case name="rr" dimension="2" force="1.0"></case>
  <mesh direction="x"><length>1.0</length><ntotal>4</ntotal><nclust>2</nclust><cltype>2</cltype>
    <cratio>1.0</cratio><btype>R, R</btype><bvalue>0, 0</bvalue><degfix>2</degfix></mesh>
  <mesh direction="y"><length>1.0</length><ntotal>4</ntotal><nclust>2</nclust><cltype>2</cltype>
    <cratio>1.0</cratio><btype>R, R</btype><bvalue>0, 0</bvalue><degfix>2</degfix></mesh>
</laplace>"#;

    fn setup() -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("rr.xml");
        std::fs::write(&f, CASE).unwrap();
        (dir, f)
    }

    #[test]
    fn suffixes_and_solution_presence() {
        let (dir, f) = setup();
        let out = dir.path().join("out");
        for (d, r, stem) in [(false, false, "rr"), (true, false, "rr_d"), (false, true, "rr_r"), (true, true, "rr_d_r")] {
            let mut o = RunOptions::new(&f, &out);
            o.allow_degenerate = d;
            o.reorder = r;
            run(&o).unwrap();
            assert!(out.join(format!("{stem}_mat.bin")).exists());
            assert!(out.join(format!("{stem}_rhs.bin")).exists());
            assert!(out.join(format!("{stem}_stats.json")).exists());
            assert_eq!(out.join(format!("{stem}_sol.bin")).exists(), !d, "{stem}");
            assert_eq!(out.join(format!("{stem}_ord.bin")).exists(), r, "{stem}");
        }
    }

    #[test]
    fn stats_json_keys() {
        let (dir, f) = setup();
        let mut o = RunOptions::new(&f, dir.path());
        o.pauli = true;
        o.fable = true;
        o.eigen = true;
        let s = run(&o).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("rr_stats.json")).unwrap()).unwrap();
        assert!(v["kappa"].as_f64().unwrap() >= 1.0);
        assert_eq!(v["nnz"], serde_json::json!(s.nnz));
        assert!(v["original"]["prep_select"]["pauli_strings"].as_u64().unwrap() > 0);
        assert!(v["original"]["fable"]["rotations"].as_u64().unwrap() > 0);
        let mut o = RunOptions::new(&f, dir.path());
        o.allow_degenerate = true;
        run(&o).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("rr_d_stats.json")).unwrap()).unwrap();
        assert!(v.get("kappa").is_none());
        assert_eq!(v["degenerate"], serde_json::json!(true));
    }

    #[test]
    fn deterministic_artifacts() {
        let (dir, f) = setup();
        let mut o = RunOptions::new(&f, dir.path().join("a"));
        o.reorder = true;
        o.pauli = true;
        o.matrix_plot = true;
        o.solution_plot = true;
        run(&o).unwrap();
        o.out_dir = dir.path().join("b");
        run(&o).unwrap();
        for name in ["rr_r_mat.bin", "rr_r_rhs.bin", "rr_r_sol.bin", "rr_r_ord.bin", "rr_r_pauli.txt", "rr_r_spy.svg", "rr_r_sol.csv"] {
            let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
            let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn catalog_runs_and_reports_failures() {
        let (dir, _) = setup();
        std::fs::write(dir.path().join("bad.xml"), "<laplace>").unwrap();
        let rows = run_catalog(dir.path(), &dir.path().join("out"), CatalogOptions::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().any(|r| r.case == "bad" && r.stats.is_err()));
        let csv = catalog_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
        let empty = tempfile::tempdir().unwrap();
        assert_eq!(catalog_csv(&run_catalog(empty.path(), empty.path(), CatalogOptions::default()).unwrap()), format!("{CATALOG_HEADER}\n"));
    }

    #[test]
    fn slice_csv_3d() {
        use crate::config::MeshSpec;
        let meshes = [Axis::X, Axis::Y, Axis::Z]
            .map(|a| MeshSpec::uniform(a, 1.0, 4, BoundaryKind::Dirichlet))
            .to_vec();
        let cfg = CaseConfig { name: "c".into(), dimension: 3, force: 1.0, meshes };
        let lat = lattice_for(&cfg).unwrap();
        let phi = vec![0.0; 64];
        assert_eq!(solution_csv(&lat, &phi, Axis::Y).lines().count(), 17);
    }
}
