//! `trisym` command-line tool.
//!
//! Exit codes: 0 success, 2 input error, 3 missing symmetry, 4 composition
//! guard, 5 internal invariant violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use trisym::automorphism::{
    classify_at, dihedral_subgroups, rooted_group_of, AutClass, GroupType, MapAutomorphism,
    RootedGroup,
};
use trisym::census::{
    counts_per_v, generate_all, roundtrip_suite_from, symmetry_statistics_from,
    verify_rooted_counts_from, write_census,
};
use trisym::core_map::{parse_rs1, serialize_rs1, Cell, PlanarMap};
use trisym::fykenet::{
    compose_rotative, decompose_rotative, rotation_subgroup, FykeFile, RotativeDecomposition,
};
use trisym::girdle::{compose_reflective, decompose_reflective, GirdleFile};
use trisym::skeleton::{compose_dihedral, decompose_dihedral, SkeletonFile};
use trisym::triangulation::{
    count_rooted, parse_near_rs1, validate_triangulation, CountParams, NearTriangulation,
    RootedTriangulation,
};
use trisym::{Error, ErrorKind};

#[derive(Parser)]
#[command(name = "trisym", version, about = "Symmetric sphere triangulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Rs1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Auto,
    Reflective,
    Rotative,
    Dihedral,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Counts,
    Groups,
    Roundtrip,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Rooted automorphism group of a triangulation.
    Classify {
        input: PathBuf,
        /// Root cell: v:<id>, e:<u>-<v> or f:<face-code>.
        #[arg(long)]
        root: String,
        /// `rs1` prints the triangulation relabelled into normal form.
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Split a triangulation into a base structure and its fillings.
    Decompose {
        input: PathBuf,
        #[arg(long)]
        root: String,
        #[arg(long, value_enum, default_value = "auto")]
        mode: Mode,
        /// auto, Z<k> or D<n>.
        #[arg(long, default_value = "auto")]
        group: String,
        /// Directory for base.json and filling-<j>.rs1.
        #[arg(long)]
        out: PathBuf,
    },
    /// Insert fillings into a base structure.
    Compose {
        base: PathBuf,
        fillings: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate all triangulations up to a vertex bound.
    Census {
        vmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Number of near-triangulations with a strong rooting.
    CountRooted { n: u64, m: u64 },
    /// Run a verification suite over the census.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 8)]
        vmax: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Input => 2,
            ErrorKind::MissingSymmetry => 3,
            ErrorKind::Guard => 4,
            ErrorKind::Internal => 5,
        };
        let message = match e.kind() {
            ErrorKind::MissingSymmetry => format!("no such symmetry at root: {}", e),
            ErrorKind::Internal => format!("internal invariant violation: {} ({:?})", e, e),
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

fn input_error(m: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: m.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {}", path.display(), e)))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| input_error(format!("{}: {}", path.display(), e)))
}

fn load(path: &Path, root: &str) -> CliResult<RootedTriangulation> {
    let map = parse_rs1(&read(path)?)?;
    let c0 = map.parse_cell(root)?;
    Ok(RootedTriangulation::new(validate_triangulation(map)?, c0)?)
}

/// RS1 of the rooted map in normal form, followed by the root line.
fn normal_rs1(map: &PlanarMap, c0: Cell) -> String {
    let (m, c) = map.normal_form(c0);
    format!("{}root: {}\n", serialize_rs1(&m), m.cell_label(c))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn aut_label(map: &PlanarMap, g: &MapAutomorphism, c0: Cell) -> CliResult<String> {
    Ok(match classify_at(map, g, c0)? {
        AutClass::Identity => "identity".into(),
        AutClass::ReflectiveAt(_) => {
            let inc = map.incident_cells_cyclic(c0)?;
            let fixed: Vec<String> = inc
                .into_iter()
                .filter(|&c| g.fixes(map, c))
                .map(|c| map.cell_label(c))
                .collect();
            format!("reflective, fixes {}", fixed.join(" "))
        }
        AutClass::RotativeAt(_) => format!("rotative of order {}", g.order()),
    })
}

fn cmd_classify(input: &Path, root: &str, format: Format) -> CliResult<String> {
    let t = load(input, root)?;
    let map = t.map();
    if format == Format::Rs1 {
        return Ok(normal_rs1(map, t.c0));
    }
    let g = rooted_group_of(map, t.c0)?;
    let labels = g
        .elements
        .iter()
        .map(|a| aut_label(map, a, t.c0))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(match format {
        Format::Json => to_json(&json!({
            "schema": 1,
            "kind": "classification",
            "root": map.cell_label(t.c0),
            "group": g.group_type.to_string(),
            "order": g.order(),
            "elements": labels,
        })),
        _ => {
            let mut s = format!("{}, order {}\n", g.group_type, g.order());
            for l in labels {
                s.push_str(&format!("  {}\n", l));
            }
            s
        }
    })
}

enum Decomposition {
    Reflective(GirdleFile, NearTriangulation),
    Rotative(RotativeDecomposition),
    Dihedral(SkeletonFile, Vec<NearTriangulation>),
}

fn dihedral_of_order(group: &RootedGroup, n: usize) -> Vec<Vec<MapAutomorphism>> {
    dihedral_subgroups(&group.elements)
        .into_iter()
        .filter(|h| h.len() == 2 * n)
        .collect()
}

fn decompose(t: &RootedTriangulation, mode: Mode, group: &str) -> CliResult<Decomposition> {
    let map = t.map();
    let full = rooted_group_of(map, t.c0)?;
    let wanted = if group.eq_ignore_ascii_case("auto") {
        None
    } else {
        Some(GroupType::parse(group).ok_or_else(|| input_error(format!("bad group '{}'", group)))?)
    };
    let mode = match (mode, wanted) {
        (Mode::Auto, Some(GroupType::Z(_))) => Mode::Rotative,
        (Mode::Auto, Some(GroupType::Dih(_))) => Mode::Dihedral,
        (Mode::Auto, Some(_)) => return Err(input_error("group must be auto, Z<k> or D<n>")),
        (Mode::Auto, None) => match full.group_type {
            GroupType::Trivial => return Err(Error::NotReflective.into()),
            GroupType::Z2Reflection => Mode::Reflective,
            GroupType::Z(_) => Mode::Rotative,
            GroupType::Dih(_) => Mode::Dihedral,
        },
        (m, _) => m,
    };
    match mode {
        Mode::Reflective => {
            let pool: Vec<MapAutomorphism> = match wanted {
                None => full.elements.clone(),
                Some(GroupType::Dih(n)) => dihedral_of_order(&full, n).into_iter().flatten().collect(),
                Some(GroupType::Z2Reflection) => full.elements.clone(),
                Some(_) => return Err(input_error("reflective mode takes auto or D<n>")),
            };
            let mut best = None;
            for phi in pool.iter().filter(|g| g.is_reflection()) {
                let (g, n) = decompose_reflective(t, phi)?;
                let key = (g.code(), n.code());
                if best.as_ref().map_or(true, |(k, _, _)| key < *k) {
                    best = Some((key, g, n));
                }
            }
            let (_, g, n) = best.ok_or(Error::NotReflective)?;
            Ok(Decomposition::Reflective(g.report(), n))
        }
        Mode::Rotative => {
            let k = match wanted {
                None => None,
                Some(GroupType::Z(k)) => Some(k),
                Some(_) => return Err(input_error("rotative mode takes auto or Z<k>")),
            };
            let h = rotation_subgroup(map, t.c0, k)?;
            Ok(Decomposition::Rotative(decompose_rotative(t, &h)?))
        }
        Mode::Dihedral => {
            let subgroups = match wanted {
                None => match full.group_type {
                    GroupType::Dih(n) => dihedral_of_order(&full, n),
                    _ => Vec::new(),
                },
                Some(GroupType::Dih(n)) => dihedral_of_order(&full, n),
                Some(_) => return Err(input_error("dihedral mode takes auto or D<n>")),
            };
            let mut best = None;
            for h in &subgroups {
                let (sk, fill) = decompose_dihedral(t, h)?;
                let key = (sk.code(), fill.iter().map(|n| n.code()).collect::<Vec<_>>());
                if best.as_ref().map_or(true, |(k, _, _)| key < *k) {
                    best = Some((key, sk, fill));
                }
            }
            let (_, sk, fill) = best.ok_or(Error::NotDihedral)?;
            Ok(Decomposition::Dihedral(sk.report()?, fill))
        }
        Mode::Auto => unreachable!("mode resolved above"),
    }
}

fn cmd_decompose(input: &Path, root: &str, mode: Mode, group: &str, out: &Path) -> CliResult<String> {
    let t = load(input, root)?;
    let dec = decompose(&t, mode, group)?;
    let (kind, base, fillings) = match dec {
        Decomposition::Reflective(g, n) => ("girdle", to_json(&g), vec![n]),
        Decomposition::Rotative(d) => ("fyke-net", to_json(&d.net.report()), d.fillings.into_values().collect()),
        Decomposition::Dihedral(s, f) => ("skeleton", to_json(&s), f),
    };
    fs::create_dir_all(out).map_err(|e| input_error(format!("{}: {}", out.display(), e)))?;
    write(&out.join("base.json"), &base)?;
    for (j, n) in fillings.iter().enumerate() {
        write(&out.join(format!("filling-{}.rs1", j + 1)), &n.to_rs1())?;
    }
    let nontrivial = fillings.iter().filter(|n| n.outer_len() > 3 || n.n() > 0).count();
    Ok(format!(
        "{} with {} filling(s), {} nontrivial, written to {}\n",
        kind,
        fillings.len(),
        nontrivial,
        out.display()
    ))
}

fn cmd_compose(base: &Path, fillings: &[PathBuf], out: Option<&Path>) -> CliResult<String> {
    let text = read(base)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {}", base.display(), e)))?;
    let fills = fillings
        .iter()
        .map(|p| Ok(parse_near_rs1(&read(p)?)?))
        .collect::<CliResult<Vec<_>>>()?;
    let parse_err = |e: serde_json::Error| input_error(format!("{}: {}", base.display(), e));
    let t = match value.get("kind").and_then(|k| k.as_str()) {
        Some("girdle") => {
            let g = serde_json::from_value::<GirdleFile>(value).map_err(parse_err)?.to_girdle()?;
            if fills.len() != 1 {
                return Err(input_error(format!("a girdle takes one filling, got {}", fills.len())));
            }
            compose_reflective(&g, &fills[0])?
        }
        Some("fyke-net") => {
            let net = serde_json::from_value::<FykeFile>(value).map_err(parse_err)?.to_fyke_net()?;
            let orbits: Vec<usize> = net.filled_orbits().into_keys().collect();
            if fills.len() != orbits.len() {
                return Err(input_error(format!(
                    "the fyke net has {} filled orbits, got {} fillings",
                    orbits.len(),
                    fills.len()
                )));
            }
            compose_rotative(&net, &orbits.into_iter().zip(fills).collect())?
        }
        Some("skeleton") => {
            let sk = serde_json::from_value::<SkeletonFile>(value).map_err(parse_err)?.to_skeleton()?;
            compose_dihedral(&sk, &fills)?
        }
        _ => return Err(input_error(format!("{}: unknown base kind", base.display()))),
    };
    let rs1 = normal_rs1(t.map(), t.c0);
    match out {
        Some(p) => {
            write(p, &rs1)?;
            Ok(String::new())
        }
        None => Ok(rs1),
    }
}

fn cmd_census(vmax: usize, out: Option<&Path>, format: Format) -> CliResult<String> {
    let entries = generate_all(vmax)?;
    if let Some(dir) = out {
        write_census(dir, &entries).map_err(|e| input_error(format!("{}: {}", dir.display(), e)))?;
    }
    let counts = counts_per_v(&entries);
    Ok(match format {
        Format::Json => to_json(&json!({
            "schema": 1,
            "kind": "census",
            "vmax": vmax,
            "counts": counts,
        })),
        _ => counts
            .iter()
            .map(|(v, n)| format!("{} triangulations on {} vertices\n", n, v))
            .collect(),
    })
}

fn cmd_verify(suite: Suite, vmax: usize, format: Format) -> CliResult<(String, bool)> {
    let entries = generate_all(vmax)?;
    let all = suite == Suite::All;
    let mut lines = Vec::new();
    let mut report = serde_json::Map::new();
    let mut failures = 0;
    if all || suite == Suite::Counts {
        let rows = verify_rooted_counts_from(&entries);
        let bad = rows.iter().filter(|r| !r.equal).count();
        failures += bad;
        for r in &rows {
            lines.push(format!(
                "counts V={}: census {} formula {} {}",
                r.v,
                r.census_sum,
                r.formula,
                if r.equal { "ok" } else { "MISMATCH" }
            ));
        }
        report.insert("counts".into(), json!(rows));
    }
    if all || suite == Suite::Groups {
        let st = symmetry_statistics_from(&entries);
        failures += st.violations.len();
        lines.push(format!(
            "groups: {} roots, {} violations",
            st.roots_checked,
            st.violations.len()
        ));
        lines.extend(st.violations.iter().map(|v| format!("  {}", v)));
        report.insert("groups".into(), json!(st));
    }
    if all || suite == Suite::Roundtrip {
        let rt = roundtrip_suite_from(&entries);
        failures += rt.failures();
        for (name, m) in [
            ("reflective", &rt.reflective),
            ("rotative", &rt.rotative),
            ("dihedral", &rt.dihedral),
        ] {
            lines.push(format!(
                "roundtrip {}: {} of {} passed",
                name, m.passed, m.instances
            ));
            lines.extend(m.failures.iter().map(|f| format!("  {}", f)));
        }
        for (fault, seen) in &rt.faults.observed {
            let tally: Vec<String> = seen.iter().map(|(k, n)| format!("{} x{}", k, n)).collect();
            lines.push(format!("fault {}: {}", fault, tally.join(", ")));
        }
        lines.extend(rt.faults.unexpected.iter().map(|f| format!("  {}", f)));
        report.insert("roundtrip".into(), json!(rt));
    }
    let ok = failures == 0;
    lines.push(format!("failures: {}", failures));
    let text = match format {
        Format::Json => {
            report.insert("schema".into(), json!(1));
            report.insert("kind".into(), json!("verify"));
            report.insert("vmax".into(), json!(vmax));
            report.insert("failures".into(), json!(failures));
            to_json(&report)
        }
        _ => lines.join("\n") + "\n",
    };
    Ok((text, ok))
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Classify { input, root, format } => cmd_classify(&input, &root, format),
        Command::Decompose {
            input,
            root,
            mode,
            group,
            out,
        } => cmd_decompose(&input, &root, mode, &group, &out),
        Command::Compose { base, fillings, out } => cmd_compose(&base, &fillings, out.as_deref()),
        Command::Census { vmax, out, format } => cmd_census(vmax, out.as_deref(), format),
        Command::CountRooted { n, m } => Ok(format!("{}\n", count_rooted(CountParams { n, m }))),
        Command::Verify { suite, vmax, format } => {
            let (text, ok) = cmd_verify(suite, vmax, format)?;
            if ok {
                Ok(text)
            } else {
                print!("{}", text);
                Err(Failure {
                    code: 5,
                    message: "verification failed".into(),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{}", text);
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
