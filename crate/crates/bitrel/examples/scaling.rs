use bitrel::blast::blast_program;
use bitrel::domain::NamedBitOrder;
use bitrel::infer::{infer_io, InferConfig};
use bitrel::machine::{parse, Source};
use bitrel::sat::{DecisionOrder, SolverConfig};
use std::time::Instant;

fn main() {
    for width in [5u32, 6, 7, 8] {
        let src = format!(".width {width}\n.regs r\n  inc r\n  inc r\n");
        let program = match parse(&src).unwrap() {
            Source::Program(p) => p,
            _ => unreachable!(),
        };
        let relation = blast_program(&program);
        let order = NamedBitOrder::full_of(&relation);
        for (label, vsids, ord) in [
            ("asc  ", false, DecisionOrder::Ascending),
            ("desc ", false, DecisionOrder::Descending),
            ("vsids", true, DecisionOrder::Ascending),
        ] {
            let config = InferConfig {
                solver: SolverConfig { vsids, order: ord, ..SolverConfig::default() },
            };
            let t = Instant::now();
            let inf = infer_io(&relation, &config).unwrap();
            println!(
                "w={width:2} {label} n={:3} iters={:3} sat_calls={:3} conflicts={:8} rows={} {:?}",
                order.len(), inf.stats.iterations, inf.stats.sat_calls,
                inf.stats.conflicts, inf.system.rows.len(), t.elapsed()
            );
        }
    }
}
