#pragma once

namespace dress {

/// Entry point of the command-line tool. Subcommands: pretrain, train-dress,
/// train-iter-inc, train-iter-dec, bn-posttrain, export, infer, eval, cost,
/// diag-cosine. Returns 0 on success, 2 on usage/config errors, 1 on runtime
/// failures; every training run writes a RunRecord CSV and a metadata JSON
/// (config echo + seed + dataset content hash) into the output directory.
int run_cli(int argc, const char* const* argv);

}  // namespace dress
