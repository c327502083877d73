use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use paucity_core::arith::SpfTable;
use paucity_core::congruence::{
    nu_closed, nu_oracle, rho_closed, rho_oracle, FormParams, NU_ORACLE_MAX, RHO_ORACLE_MAX,
};
use paucity_core::constants::{self, ConstantValue};
use paucity_core::meanvalue::{
    accumulate, fmt_float, write_csv, CheckpointGrid, R0Convention, Statistic, CSV_HEADER,
};
use paucity_core::quadruples::{
    change_of_variables_check, enumerate_offdiag_with, enumerate_param_side, exceptional_set_count,
    param_invert, param_quadruple, QuadClass, CHANGE_OF_VARIABLES_MAX_LIMIT,
    EXCEPTIONAL_MIN_LIMIT,
};
use paucity_core::sieve::{sieve_all, sieve_primes, SieveConfig};
use serde_json::json;

use crate::manifest::RunManifest;
use crate::{
    CliError, Command, CongruenceArgs, CongruenceKind, ConstantsArgs, MeanArgs, OffdiagArgs,
    OffdiagMode, R0Flag, ReportArgs, Result, SieveArgs, SieveOpts, THREADS_ENV,
};

pub(crate) const N1_CONVENTION_NOTE: &str = "intervals read as (min, max) with q < r: \
N1 = a<q<r<p, N1' = q<a,p<r, N1'' = p<q<r<a; solutions with q > r are counted as mirrored; \
a <= 2, a = p, q = r or a coordinate equal to 2 are degenerate";

pub(crate) fn execute(command: Command, command_line: Vec<String>) -> Result<()> {
    match command {
        Command::Sieve(args) => sieve(args, command_line),
        Command::Mean(args) => mean(args, command_line),
        Command::Constants(args) => constants_cmd(args, command_line),
        Command::Congruence(args) => congruence(args, command_line),
        Command::Offdiag(args) => offdiag(args, command_line),
        Command::Report(args) => report(args, command_line),
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        return v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| {
                CliError::Validation(format!("{THREADS_ENV}={v} is not a positive integer"))
            });
    }
    Ok(flag.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    }))
}

fn sieve_config(opts: &SieveOpts) -> Result<SieveConfig> {
    let cfg = SieveConfig::new(opts.limit)
        .with_block_size(opts.block_size)
        .with_threads(resolve_threads(opts.threads)?);
    cfg.validate()?;
    Ok(cfg)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn create(dir: &Path, name: &str) -> Result<(BufWriter<File>, PathBuf)> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(CliError::io(&path))?;
    Ok((BufWriter::new(file), path))
}

fn sieve(args: SieveArgs, command_line: Vec<String>) -> Result<()> {
    let cfg = sieve_config(&args.sieve)?;
    let dir = &args.common.out_dir;
    prepare_dir(dir)?;
    let mut manifest = RunManifest::start(
        "sieve",
        command_line,
        json!({
            "limit": cfg.limit,
            "block_size": cfg.block_size,
            "threads": cfg.thread_count,
            "dump": args.dump.as_ref().map(|p| p.display().to_string()),
        }),
    );
    let (mut w, path) = create(dir, "sieve_blocks.csv")?;
    let io = CliError::io(&path);
    let mut dump = match &args.dump {
        Some(p) => Some((
            BufWriter::new(File::create(p).map_err(CliError::io(p))?),
            p.clone(),
        )),
        None => None,
    };
    writeln!(w, "lo,hi,sum_r0_pair,sum_r0_div,sum_r1,sum_r2,max_r0_div")
        .map_err(CliError::io(&path))?;
    for block in sieve_all(cfg)? {
        let block = block?;
        let total = |v: &[u16]| v.iter().map(|&x| x as u64).sum::<u64>();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            block.lo,
            block.hi - 1,
            total(&block.r0_pair),
            total(&block.r0_div),
            total(&block.r1),
            total(&block.r2),
            block.r0_div.iter().max().copied().unwrap_or(0)
        )
        .map_err(CliError::io(&path))?;
        if let Some((d, p)) = dump.as_mut() {
            block.write_dump(d).map_err(CliError::io(p.as_path()))?;
        }
    }
    w.flush().map_err(io)?;
    manifest.output(&path);
    if let Some((mut d, p)) = dump {
        d.flush().map_err(CliError::io(&p))?;
        manifest.output(&p);
    }
    println!("wrote {}", path.display());
    manifest.finish(dir)?;
    Ok(())
}

fn parse_stats(list: &str) -> Result<Vec<Statistic>> {
    let stats = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Statistic::parse)
        .collect::<paucity_core::Result<Vec<_>>>()?;
    if stats.is_empty() {
        return Err(CliError::Validation("no statistics requested".into()));
    }
    Ok(stats)
}

fn mean(args: MeanArgs, command_line: Vec<String>) -> Result<()> {
    let cfg = sieve_config(&args.sieve)?;
    let stats = parse_stats(&args.stats)?;
    let grid = CheckpointGrid::parse(&args.grid, cfg.limit)?;
    let convention = match args.r0 {
        R0Flag::Pair => R0Convention::Pair,
        R0Flag::Div => R0Convention::Divisor,
    };
    let dir = &args.common.out_dir;
    prepare_dir(dir)?;
    let mut manifest = RunManifest::start(
        "mean",
        command_line,
        json!({
            "limit": cfg.limit,
            "block_size": cfg.block_size,
            "threads": cfg.thread_count,
            "grid": grid.points(),
            "statistics": stats.iter().map(Statistic::name).collect::<Vec<_>>(),
            "r0_convention": convention.name(),
        }),
    );
    let spf = if stats.iter().any(Statistic::needs_factorization) {
        Some(SpfTable::new(grid.last())?)
    } else {
        None
    };
    let series = accumulate(sieve_all(cfg)?, &grid, &stats, convention, spf.as_ref())?;
    let (mut w, path) = create(dir, "mean.csv")?;
    write_csv(&series, &mut w).map_err(CliError::io(&path))?;
    w.flush().map_err(CliError::io(&path))?;
    manifest.output(&path);
    println!("wrote {}", path.display());
    manifest.finish(dir)?;
    Ok(())
}

fn constants_cmd(args: ConstantsArgs, command_line: Vec<String>) -> Result<()> {
    let dir = &args.common.out_dir;
    prepare_dir(dir)?;
    let mut manifest = RunManifest::start(
        "constants",
        command_line,
        json!({
            "eps": args.eps,
            "prime_limit": args.prime_limit,
            "density_z": args.density_z,
        }),
    );
    let g = constants::catalan(args.eps)?;
    let k = constants::landau_ramanujan(args.prime_limit)?;
    let k3 = constants::landau_ramanujan_mod3(args.prime_limit)?;
    let pi = std::f64::consts::PI;
    let derived = |name: &'static str, scale: f64| ConstantValue {
        name,
        value: scale * g.value,
        error_bound: scale * g.error_bound,
        method: "scaled Catalan constant".into(),
    };
    let mut rows = vec![
        g.clone(),
        k,
        k3,
        derived("s02_coefficient_12G_over_pi2", 12.0 / (pi * pi)),
        derived("lemma32_coefficient_12G_over_pi3", 12.0 / (pi * pi * pi)),
    ];
    let (mut w, path) = create(dir, "constants.csv")?;
    let io = |e| CliError::io(&path)(e);
    writeln!(w, "name,value,error_bound").map_err(io)?;
    for c in rows.drain(..) {
        writeln!(w, "{},{},{}", c.name, fmt_float(c.value), fmt_float(c.error_bound))
            .map_err(io)?;
    }
    if let Some(&zmax) = args.density_z.iter().max() {
        let primes = sieve_primes(zmax.max(3))?;
        for &z in &args.density_z {
            let v = constants::sieve_density_product(z as f64, &primes)?;
            let vn = constants::sieve_density_normalized(z as f64, &primes)?;
            writeln!(w, "sieve_density_V({z}),{},", fmt_float(v)).map_err(io)?;
            writeln!(w, "sieve_density_V_log3({z}),{},", fmt_float(vn)).map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    manifest.output(&path);
    println!("wrote {}", path.display());
    manifest.finish(dir)?;
    Ok(())
}

fn congruence(args: CongruenceArgs, command_line: Vec<String>) -> Result<()> {
    if args.max < 1 {
        return Err(CliError::Validation("--max must be >= 1".into()));
    }
    let dir = &args.common.out_dir;
    prepare_dir(dir)?;
    let kind = match args.kind {
        CongruenceKind::Rho => "rho",
        CongruenceKind::Nu => "nu",
    };
    let mut manifest = RunManifest::start(
        "congruence",
        command_line,
        json!({ "kind": kind, "max": args.max, "t": args.t, "d": args.d }),
    );
    let capacity = match args.kind {
        CongruenceKind::Rho => RHO_ORACLE_MAX,
        CongruenceKind::Nu => NU_ORACLE_MAX,
    };
    if args.max > capacity {
        return Err(paucity_core::Error::Capacity {
            what: "congruence oracle modulus",
            requested: args.max,
            capacity,
        }
        .into());
    }
    let spf = SpfTable::new(args.max.max(2))?;
    let (mut w, path) = create(dir, &format!("congruence_{kind}.csv"))?;
    let io = |e| CliError::io(&path)(e);
    writeln!(w, "modulus,t,d,closed,oracle,match").map_err(io)?;
    let mut mismatches = 0u64;
    match args.kind {
        CongruenceKind::Rho => {
            for m in 1..=args.max {
                let closed = rho_closed(&spf.factorize(m)?).count;
                let oracle = rho_oracle(m)?.count;
                mismatches += (closed != oracle) as u64;
                writeln!(w, "{m},,,{closed},{oracle},{}", closed == oracle).map_err(io)?;
            }
        }
        CongruenceKind::Nu => {
            let params = FormParams::new(args.t, args.d)?;
            for m in 1..=args.max {
                let f = spf.factorize(m)?;
                if !f.is_squarefree() {
                    continue;
                }
                let closed = nu_closed(&f, params)?.count;
                let oracle = nu_oracle(m, params)?.count;
                mismatches += (closed != oracle) as u64;
                writeln!(w, "{m},{},{},{closed},{oracle},{}", args.t, args.d, closed == oracle)
                    .map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)?;
    if mismatches > 0 {
        eprintln!("warning: {mismatches} closed-form values differ from the oracle");
        manifest
            .notes
            .push(format!("{mismatches} closed/oracle mismatches"));
    }
    manifest.output(&path);
    println!("wrote {} ({mismatches} mismatches)", path.display());
    manifest.finish(dir)?;
    Ok(())
}

fn offdiag(args: OffdiagArgs, command_line: Vec<String>) -> Result<()> {
    let dir = &args.common.out_dir;
    prepare_dir(dir)?;
    let mode = match args.mode {
        OffdiagMode::Direct => "direct",
        OffdiagMode::Param => "param",
        OffdiagMode::Both => "both",
    };
    let mut manifest = RunManifest::start(
        "offdiag",
        command_line,
        json!({ "limit": args.limit, "mode": mode, "emit_quadruples": args.emit_quadruples }),
    );
    manifest.notes.push(N1_CONVENTION_NOTE.into());
    eprintln!("note: {N1_CONVENTION_NOTE}");

    let mut rows: Vec<(String, String)> = Vec::new();
    let mut n1_direct = None;
    if args.mode != OffdiagMode::Param {
        let mut quad_out = if args.emit_quadruples {
            let (mut w, path) = create(dir, "quadruples.csv")?;
            writeln!(w, "a,p,q,r,n").map_err(CliError::io(&path))?;
            Some((w, path))
        } else {
            None
        };
        let mut write_err = None;
        let census = enumerate_offdiag_with(args.limit, |q, _| {
            if let Some((w, _)) = quad_out.as_mut() {
                if write_err.is_none() {
                    if let Err(e) = writeln!(w, "{},{},{},{},{}", q.a, q.p, q.q, q.r, q.n) {
                        write_err = Some(e);
                    }
                }
            }
        })?;
        if let Some((mut w, path)) = quad_out {
            if let Some(e) = write_err {
                return Err(CliError::io(&path)(e));
            }
            w.flush().map_err(CliError::io(&path))?;
            manifest.output(&path);
        }
        n1_direct = Some(census.n1);
        for (k, v) in [
            ("N", census.total),
            ("N1", census.n1),
            ("N1_prime", census.n1_prime),
            ("N1_double_prime", census.n1_double_prime),
            ("mirrored", census.mirrored),
            ("degenerate", census.degenerate),
            ("diagonal", census.diagonal),
        ] {
            rows.push((k.into(), v.to_string()));
        }
        if args.limit <= CHANGE_OF_VARIABLES_MAX_LIMIT {
            let cov = change_of_variables_check(args.limit)?;
            rows.push(("change_of_variables_violations".into(), cov.violations.to_string()));
        }
        if args.limit >= EXCEPTIONAL_MIN_LIMIT {
            let ex = exceptional_set_count(args.limit)?;
            for (k, v) in [
                ("exceptional_P1", ex.p1),
                ("exceptional_P2", ex.p2),
                ("exceptional_P3", ex.p3),
                ("exceptional_union", ex.union),
                ("exceptional_total_upper", ex.total_upper),
            ] {
                rows.push((k.into(), v.to_string()));
            }
        }
    }
    if args.mode != OffdiagMode::Direct {
        let mut round_trip_failures = 0u64;
        let count = enumerate_param_side(args.limit, |pt, quad| {
            let ok = param_invert(quad).ok() == Some(*pt)
                && param_quadruple(pt).ok().as_ref() == Some(quad)
                && quad.class() == QuadClass::N1;
            round_trip_failures += (!ok) as u64;
        })?;
        rows.push(("N1_param".into(), count.to_string()));
        rows.push(("round_trip_failures".into(), round_trip_failures.to_string()));
        if let Some(direct) = n1_direct {
            rows.push(("N1_consistent".into(), (direct == count).to_string()));
        }
    }

    let (mut w, path) = create(dir, "offdiag.csv")?;
    let io = |e| CliError::io(&path)(e);
    writeln!(w, "quantity,value").map_err(io)?;
    for (k, v) in &rows {
        writeln!(w, "{k},{v}").map_err(io)?;
        println!("{k} = {v}");
    }
    w.flush().map_err(io)?;
    manifest.output(&path);
    manifest.finish(dir)?;
    Ok(())
}

struct ReportRow {
    statistic: Statistic,
    x: u64,
    raw: String,
    raw_value: f64,
}

fn read_mean_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let file = File::open(path).map_err(CliError::io(path))?;
    let mut lines = BufReader::new(file).lines();
    let schema = |detail: String| CliError::Schema {
        path: path.to_path_buf(),
        detail,
    };
    let header = lines
        .next()
        .transpose()
        .map_err(CliError::io(path))?
        .ok_or_else(|| schema("empty file".into()))?;
    if header.trim_end() != CSV_HEADER {
        return Err(schema(format!("expected header `{CSV_HEADER}`, found `{header}`")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(CliError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(schema(format!("line {}: expected 6 fields", i + 2)));
        }
        let x = fields[0]
            .parse()
            .map_err(|_| schema(format!("line {}: bad x `{}`", i + 2, fields[0])))?;
        let statistic = Statistic::parse(fields[1])
            .map_err(|_| schema(format!("line {}: unknown statistic `{}`", i + 2, fields[1])))?;
        let raw_value = fields[2]
            .parse()
            .map_err(|_| schema(format!("line {}: bad raw value `{}`", i + 2, fields[2])))?;
        rows.push(ReportRow {
            statistic,
            x,
            raw: fields[2].to_string(),
            raw_value,
        });
    }
    Ok(rows)
}

fn plot_file_name(stat: &Statistic) -> String {
    let clean: String = stat
        .name()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect();
    format!("plot_{}.csv", clean.trim_end_matches('_'))
}

fn report(args: ReportArgs, command_line: Vec<String>) -> Result<()> {
    if args.inputs.is_empty() {
        return Err(CliError::Validation("report needs at least one input".into()));
    }
    let dir = &args.common.out_dir;
    prepare_dir(dir)?;
    let mut manifest = RunManifest::start(
        "report",
        command_line,
        json!({ "inputs": args.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>() }),
    );
    let mut rows = Vec::new();
    for input in &args.inputs {
        rows.extend(read_mean_csv(input)?);
    }
    if rows.is_empty() {
        return Err(CliError::Validation("inputs contain no data rows".into()));
    }

    let (mut w, path) = create(dir, "report.csv")?;
    let io = |e| CliError::io(&path)(e);
    writeln!(
        w,
        "statistic,x,raw_value,normalized_value,predicted_constant,predicted_main_term,deviation,relative_deviation"
    )
    .map_err(io)?;
    let mut plots: Vec<(Statistic, Vec<(u64, f64)>)> = Vec::new();
    for row in &rows {
        let xf = row.x as f64;
        let normalized = row.statistic.normalize(row.raw_value, xf);
        let constant = row.statistic.predicted_constant();
        let main = constants::predicted_main_term(row.statistic, xf).ok();
        let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
        let deviation = constant.map(|c| normalized - c);
        let relative = constant.map(|c| (normalized - c) / c);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            row.statistic,
            row.x,
            row.raw,
            fmt_float(normalized),
            opt(constant),
            opt(main),
            opt(deviation),
            opt(relative)
        )
        .map_err(io)?;
        match plots.iter_mut().find(|(s, _)| *s == row.statistic) {
            Some((_, pts)) => pts.push((row.x, normalized)),
            None => plots.push((row.statistic, vec![(row.x, normalized)])),
        }
    }
    w.flush().map_err(io)?;
    manifest.output(&path);
    println!("wrote {}", path.display());

    for (stat, pts) in plots {
        let (mut w, path) = create(dir, &plot_file_name(&stat))?;
        let io = |e| CliError::io(&path)(e);
        writeln!(w, "x,ratio").map_err(io)?;
        for (x, ratio) in pts {
            writeln!(w, "{x},{}", fmt_float(ratio)).map_err(io)?;
        }
        w.flush().map_err(io)?;
        manifest.output(&path);
    }
    manifest.finish(dir)?;
    Ok(())
}
