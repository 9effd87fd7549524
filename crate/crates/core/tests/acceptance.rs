//! One line per acceptance criterion. Slow: the exhaustive four-node sweep
//! runs twice.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cfe_core::exploration::{generate_sequence, verify_sequence, Certification, GenerateOptions, Verdict, VerifyOptions};
use cfe_core::graph::PortGraph;
use cfe_core::protocol::Mutation;
use cfe_core::sequences::bundled;
use cfe_core::sim::{run, Scenario, TraceEvent};
use cfe_core::verify::{demos, sweep, sweep_with, Property, PropertyReport, SweepSpec};

struct Line {
    id: u32,
    title: &'static str,
    ok: bool,
    detail: String,
}

fn failures(reports: &[&PropertyReport], props: &[Property]) -> u64 {
    reports
        .iter()
        .flat_map(|r| r.properties.iter())
        .filter(|t| props.contains(&t.property))
        .map(|t| t.failed)
        .sum()
}

fn complete(reports: &[&PropertyReport]) -> bool {
    reports.iter().all(|r| !r.partial && r.scenarios > 0)
}

/// Exhaustive sweeps for 3 and up to 4 nodes; writes both reports and every
/// three-node trace into `dir`.
fn exhaustive_run(dir: &Path) -> Vec<PropertyReport> {
    fs::create_dir_all(dir).unwrap();
    let mut out = Vec::new();
    for n in [3, 4] {
        let spec = SweepSpec::exhaustive(n, bundled(n).unwrap());
        let report = if n == 3 {
            let mut w = BufWriter::new(File::create(dir.join("traces-n3.jsonl")).unwrap());
            let r = sweep_with(&spec, |_, t| t.write_jsonl(&mut w).unwrap()).unwrap();
            w.flush().unwrap();
            r
        } else {
            sweep(&spec).unwrap()
        };
        fs::write(dir.join(format!("report-n{n}.json")), report.to_json()).unwrap();
        out.push(report);
    }
    out
}

fn pinned_red_round(g: PortGraph, starts: [usize; 2]) -> Option<u64> {
    let seq = bundled(g.node_count().max(3))?;
    let trace = run(&Scenario::new(g, starts, [0, 0], seq)).ok()?;
    let mut red = [None, None];
    for (r, e) in trace.events() {
        if let TraceEvent::RedRound { agent, .. } = e {
            red[*agent].get_or_insert(r);
        }
    }
    (red[0] == red[1]).then_some(red[0]).flatten()
}

fn main() -> ExitCode {
    let started = Instant::now();
    let work = tempfile::tempdir().unwrap();
    let mut lines = Vec::new();
    let mut emit = |line: Line| {
        println!(
            "criterion {} [PRIMARY] {}: {} ({})",
            line.id,
            line.title,
            if line.ok { "PASS" } else { "FAIL" },
            line.detail
        );
        lines.push(line.ok);
    };

    // 1
    let t = Instant::now();
    let first = exhaustive_run(&work.path().join("run1"));
    let base = [Property::NoCollision, Property::NoViolation, Property::Coverage, Property::Termination, Property::IdleAfterTermination];
    let ex: Vec<&PropertyReport> = first.iter().collect();
    let bad = failures(&ex, &base);
    emit(Line {
        id: 1,
        title: "exhaustive correctness, n <= 4",
        ok: bad == 0 && complete(&ex),
        detail: format!(
            "{} + {} scenarios over {} + {} port-numbered graphs, offsets {:?} / {:?}, {bad} failures, {:.0?}",
            first[0].scenarios, first[1].scenarios, first[0].graphs, first[1].graphs, first[0].offsets, first[1].offsets, t.elapsed()
        ),
    });

    // 2
    let t = Instant::now();
    let sampled: Vec<PropertyReport> =
        [(5, 5u64), (6, 6)].iter().map(|&(n, seed)| sweep(&SweepSpec::sampled(n, bundled(n).unwrap(), seed, 500)).unwrap()).collect();
    let sm: Vec<&PropertyReport> = sampled.iter().collect();
    let bad = failures(&sm, &base);
    emit(Line {
        id: 2,
        title: "sampled correctness, n = 5 and 6",
        ok: bad == 0 && complete(&sm) && sampled.iter().all(|r| r.scenarios >= 500),
        detail: format!("{} + {} scenarios (seeds 5, 6), {bad} failures, {:.0?}", sampled[0].scenarios, sampled[1].scenarios, t.elapsed()),
    });

    let all: Vec<&PropertyReport> = first.iter().chain(sampled.iter()).collect();

    // 3
    let pinned = [
        ("no common neighbour", PortGraph::path(6).unwrap(), [2, 3], 4),
        ("leaf start", PortGraph::path(4).unwrap(), [0, 1], 6),
        ("one side waits", PortGraph::path(3).unwrap(), [0, 2], 5),
    ];
    let got: Vec<(u64, Option<u64>)> = pinned.into_iter().map(|(_, g, s, want)| (want, pinned_red_round(g, s))).collect();
    let bad = failures(&all, &[Property::RedRound]);
    emit(Line {
        id: 3,
        title: "red round agreement and pinned sub-cases",
        ok: bad == 0 && got.iter().all(|(want, red)| *red == Some(*want)),
        detail: format!("{bad} trace failures; pinned t+4/t+6/t+5 observed {:?}", got.iter().map(|g| g.1).collect::<Vec<_>>()),
    });

    // 4
    let bad = failures(&all, &[Property::TimeBound]);
    let within = all.iter().all(|r| r.stats.max_time <= 3 * r.sigma + 64);
    emit(Line {
        id: 4,
        title: "time <= 3 sigma + 64",
        ok: bad == 0 && within,
        detail: all
            .iter()
            .map(|r| format!("n={}: max {} <= {}", r.n, r.stats.max_time, 3 * r.sigma + 64))
            .collect::<Vec<_>>()
            .join(", "),
    });

    // 5
    let props = [Property::ProgressBound, Property::ProgressAdvance, Property::Alternation];
    let bad = failures(&all, &props);
    let bound = |r: &PropertyReport| {
        let n = r.n.max(3) as f64;
        2 * n.log2().ceil() as u64 + 4
    };
    emit(Line {
        id: 5,
        title: "Progress bound, advance and alternation",
        ok: bad == 0 && all.iter().all(|r| r.stats.max_progress_rounds <= bound(r)),
        detail: format!(
            "{bad} failures; max Progress rounds {}",
            all.iter().map(|r| format!("n={}: {} <= {}", r.n, r.stats.max_progress_rounds, bound(r))).collect::<Vec<_>>().join(", ")
        ),
    });

    // 6
    let mut ok = true;
    let mut detail = Vec::new();
    for n in 3..=5 {
        let generated = generate_sequence(n, &GenerateOptions::default()).unwrap();
        let shipped = bundled(n).unwrap();
        let t = Instant::now();
        let verdict = verify_sequence(&generated.terms, n, &VerifyOptions::default()).unwrap();
        let took = t.elapsed();
        let certified = matches!(verdict, Verdict::Certified { certification: Certification::Exhaustive, .. });
        ok &= certified && generated.terms == shipped.terms && took < Duration::from_secs(600);
        if let Verdict::Certified { instances, .. } = verdict {
            detail.push(format!("n={n}: L={} over {instances} instances in {took:.1?}", generated.len()));
        } else {
            detail.push(format!("n={n}: counterexample"));
        }
    }
    emit(Line { id: 6, title: "sequence certification for n = 3, 4, 5", ok, detail: detail.join(", ") });

    // 7
    let k2 = (0..=20).filter(|&x| demos::demo_k2(x).unwrap().collision.is_none()).count();
    let mut star = 0;
    for x0 in 0..=10 {
        for x1 in 0..=10 {
            let w = demos::demo_star_radius1(3, [x0, x1]).unwrap();
            star += usize::from(!matches!(w.collision, Some((_, 0))));
        }
    }
    let ring = (1..=10).filter(|&j| !demos::demo_ring_unbounded(j).unwrap().incomplete()).count();
    emit(Line {
        id: 7,
        title: "impossibility demos",
        ok: k2 == 0 && star == 0 && ring == 0,
        detail: format!("misses: k2 {k2}/21, star {star}/121, ring {ring}/10"),
    });

    // 8
    let mut caught = Vec::new();
    for m in Mutation::ALL {
        let mut spec = SweepSpec::exhaustive(4, bundled(4).unwrap());
        spec.mutation = Some(m);
        spec.stop_at_first_failure = true;
        let r = sweep(&spec).unwrap();
        let names: Vec<&str> = r.failed_properties().iter().map(|p| p.name()).collect();
        caught.push((m, !r.passed() && r.failed_scenarios > 0, names.join("+")));
    }
    emit(Line {
        id: 8,
        title: "mutation sensitivity",
        ok: caught.iter().all(|c| c.1),
        detail: caught.iter().map(|(m, _, p)| format!("{} -> {p}", m.name())).collect::<Vec<_>>().join(", "),
    });

    // 9
    let t = Instant::now();
    let second = exhaustive_run(&work.path().join("run2"));
    let mut same = true;
    let mut files = 0;
    for name in ["traces-n3.jsonl", "report-n3.json", "report-n4.json"] {
        let a = fs::read(work.path().join("run1").join(name)).unwrap();
        let b = fs::read(work.path().join("run2").join(name)).unwrap();
        same &= a == b;
        files += 1;
    }
    emit(Line {
        id: 9,
        title: "determinism",
        ok: same && first == second,
        detail: format!("{files} files compared, n=4 trace digest {}, {:.0?}", &second[1].trace_digest[..16], t.elapsed()),
    });

    let passed = lines.iter().filter(|&&ok| ok).count();
    println!("{passed}/{} criteria passed in {:.0?}", lines.len(), started.elapsed());
    if passed == lines.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
