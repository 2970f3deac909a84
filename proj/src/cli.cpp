#include "simulmt/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <pthread.h>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "simulmt/annotation.hpp"
#include "simulmt/corpus.hpp"
#include "simulmt/kernels.hpp"
#include "simulmt/latency.hpp"
#include "simulmt/quality.hpp"
#include "simulmt/report.hpp"
#include "simulmt/server.hpp"

namespace simulmt {

namespace {

namespace fs = std::filesystem;

// Reads every non-blank line of a JSONL log file ("-" is `in`).
std::vector<StreamLog> read_logs(const std::string& path, std::istream& in) {
  std::ifstream file;
  std::istream* src = &in;
  if (path != "-") {
    file.open(path, std::ios::binary);
    if (!file) throw DataError("cannot open " + path);
    src = &file;
  }
  const std::string name = path == "-" ? "<stdin>" : path;
  std::vector<StreamLog> logs;
  std::string line;
  std::size_t n = 0;
  while (std::getline(*src, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      logs.push_back(parse_stream_log(line));
    } catch (const Error& e) {
      throw DataError(name, n, e.what());
    }
  }
  return logs;
}

std::vector<TokenSeq> read_token_lines(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open " + path);
  std::vector<TokenSeq> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(file, line)) {
    ++n;
    try {
      out.push_back(TokenSeq::from_line(line));
    } catch (const Error& e) {
      throw DataError(path, n, e.what());
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw DataError("write failed for " + path.string());
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2); }

CLI::Validator log_source() {
  return CLI::Validator(
      [](std::string& value) -> std::string {
        if (value == "-" || fs::is_regular_file(value)) return {};
        return "File does not exist: " + value;
      },
      "FILE|-");
}

class Commands {
 public:
  Commands(std::istream& in, std::ostream& out, std::ostream& err)
      : in_(in), out_(out), err_(err) {}

  void install(CLI::App& app);
  int run(CLI::App& app);

 private:
  int aa();
  int filter();
  int stats();
  int al();
  int ne();
  int bleu();
  int norm();
  int drop();
  int bleu_stream_cmd();
  int waitk();
  int validate();
  int serve();
  int export_cmd();

  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;

  // Shared option storage; each subcommand binds what it needs.
  std::string src_, tgt_, align_, out_path_, summary_, prefix_, logs_ = "-";
  std::string hyp_, ref_, sys_, smoothing_ = "exp", id_ = "waitk";
  std::string host_ = "127.0.0.1", journal_dir_, static_dir_;
  double threshold_ = 0.0, high_ = 0.0, low_ = 0.0, model_ = 0.0, base_ = 0.0;
  std::size_t src_len_ = 0, tgt_len_ = 0, k_ = 0;
  std::optional<std::size_t> sample_;
  std::optional<std::uint64_t> seed_;
  int port_ = 8080;
  bool stabilized_ = false;

  std::vector<std::pair<CLI::App*, int (Commands::*)()>> handlers_;
};

void Commands::install(CLI::App& app) {
  const auto add = [&](const char* name, const char* help, int (Commands::*fn)()) {
    auto* sub = app.add_subcommand(name, help);
    handlers_.emplace_back(sub, fn);
    return sub;
  };

  auto* aa = add("aa", "Average anticipation of every pair in a corpus", &Commands::aa);
  aa->add_option("--src", src_, "Tokenized source file")->required()->check(CLI::ExistingFile);
  aa->add_option("--tgt", tgt_, "Tokenized target file")->required()->check(CLI::ExistingFile);
  aa->add_option("--align", align_, "Pharaoh alignment file (0-indexed i-j)")
      ->required()
      ->check(CLI::ExistingFile);
  aa->add_option("--out", out_path_,
                 "Write the id/aa TSV here and print the JSON summary on stdout "
                 "(default: TSV on stdout)");
  aa->add_option("--summary", summary_, "Also write the JSON summary to this file");

  auto* filter = add("filter", "Extract the pairs with AA <= threshold", &Commands::filter);
  filter->add_option("--src", src_, "Tokenized source file")->required()->check(CLI::ExistingFile);
  filter->add_option("--tgt", tgt_, "Tokenized target file")->required()->check(CLI::ExistingFile);
  filter->add_option("--align", align_, "Pharaoh alignment file")
      ->required()
      ->check(CLI::ExistingFile);
  filter->add_option("--prefix", prefix_,
                     "Output prefix: <prefix>.aa.tsv, <prefix>.kept.{src,tgt}, "
                     "<prefix>.stats.json")
      ->required();
  filter->add_option("--threshold", threshold_, "Keep pairs with AA <= threshold (default 0; 'inf' keeps all)")
      ->check(CLI::Range(0.0, std::numeric_limits<double>::infinity()));
  auto* sample = filter->add_option("--sample", sample_,
                                    "Keep a uniform random subset of this many eligible pairs");
  auto* seed = filter->add_option("--seed", seed_, "Seed for --sample");
  sample->needs(seed);

  auto* stats = add("stats", "Dataset statistics (source length, AA, annotation AL)",
                    &Commands::stats);
  stats->add_option("--src", src_, "Tokenized source file")->required()->check(CLI::ExistingFile);
  stats->add_option("--tgt", tgt_, "Tokenized target file")->required()->check(CLI::ExistingFile);
  stats->add_option("--align", align_, "Pharaoh alignment file")->check(CLI::ExistingFile);
  stats->add_option("--logs", logs_, "Streaming annotation logs (JSONL)")->check(CLI::ExistingFile);
  stats->add_option("--out", out_path_, "Write the JSON report here instead of stdout");

  auto* al = add("al", "Average lagging of streaming logs (id<TAB>AL)", &Commands::al);
  al->add_option("--logs", logs_, "JSONL stream logs, '-' for stdin (default)")->check(log_source());
  al->add_option("--summary", summary_, "Write a JSON corpus summary to this file");
  al->add_flag("--stabilized", stabilized_,
               "Extension: accept retranslation logs, using the step at which "
               "each target prefix stops changing as its delay");

  auto* ne = add("ne", "Normalized erasure of retranslation logs (id<TAB>NE)", &Commands::ne);
  ne->add_option("--logs", logs_, "JSONL stream logs, '-' for stdin (default)")->check(log_source());
  ne->add_option("--summary", summary_, "Write a JSON corpus summary to this file");

  auto* bleu = add("bleu", "Corpus BLEU-4 of pre-tokenized hypotheses", &Commands::bleu);
  bleu->add_option("--hyp", hyp_, "Hypothesis file")->required()->check(CLI::ExistingFile);
  bleu->add_option("--ref", ref_, "Reference file")->required()->check(CLI::ExistingFile);
  bleu->add_option("--smoothing", smoothing_, "exp (default) or none")
      ->check(CLI::IsMember({"exp", "none"}));

  auto* norm = add("norm", "Norm-Score: model BLEU divided by full-sentence BLEU", &Commands::norm);
  norm->add_option("--model", model_, "Model score")->required();
  norm->add_option("--base", base_, "Full-sentence base score (> 0)")->required();

  auto* drop = add("drop", "Relative quality drop between two settings", &Commands::drop);
  drop->add_option("--high", high_, "Score of the high-latency setting (> 0)")->required();
  drop->add_option("--low", low_, "Score of the low-latency setting")->required();

  auto* bs = add("bleu-stream", "BLEU over partial outputs at matched source prefixes",
                 &Commands::bleu_stream_cmd);
  bs->add_option("--sys", sys_, "System stream logs (JSONL)")->required()->check(CLI::ExistingFile);
  bs->add_option("--ref", ref_, "Reference annotation logs (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  bs->add_option("--smoothing", smoothing_, "exp (default) or none")
      ->check(CLI::IsMember({"exp", "none"}));

  auto* wk = add("waitk-path", "Emit the wait-k READ/WRITE schedule as a stream log",
                 &Commands::waitk);
  wk->add_option("--src-len", src_len_, "Source length")->required()->check(CLI::PositiveNumber);
  wk->add_option("--tgt-len", tgt_len_, "Target length")->required()->check(CLI::PositiveNumber);
  wk->add_option("--k", k_, "Initial wait k")->required()->check(CLI::PositiveNumber);
  wk->add_option("--id", id_, "Log id (default waitk)");

  auto* vl = add("validate-log", "Check stream logs against the protocol (and sources)",
                 &Commands::validate);
  vl->add_option("--logs", logs_, "JSONL stream logs, '-' for stdin (default)")->check(log_source());
  vl->add_option("--src", src_, "Source file, one line per log in the same order")
      ->check(CLI::ExistingFile);

  auto* sv = add("serve", "Run the annotation service", &Commands::serve);
  sv->add_option("--host", host_, "Bind address (default 127.0.0.1)");
  sv->add_option("--port", port_, "Port (default 8080)")->check(CLI::Range(1, 65535));
  sv->add_option("--journal-dir", journal_dir_,
                 std::string("Journal directory (default $") + kJournalDirEnv + ")");
  sv->add_option("--static-dir", static_dir_, "UI assets served at /")->check(CLI::ExistingDirectory);

  auto* ex = add("export", "Export finished annotation sessions from a journal",
                 &Commands::export_cmd);
  ex->add_option("--journal-dir", journal_dir_,
                 std::string("Journal directory (default $") + kJournalDirEnv + ")");
  ex->add_option("--out", prefix_, "Output prefix: <out>.ref and <out>.jsonl")->required();
}

int Commands::run(CLI::App&) {
  for (const auto& [sub, fn] : handlers_) {
    if (sub->parsed()) return (this->*fn)();
  }
  return 1;
}

int Commands::aa() {
  ParallelReader reader(src_, tgt_, align_);
  std::ofstream file;
  std::ostream* tsv = &out_;
  if (!out_path_.empty()) {
    file.open(out_path_, std::ios::binary | std::ios::trunc);
    if (!file) throw DataError("cannot write " + out_path_);
    tsv = &file;
  }
  *tsv << "id\taa\n";
  AAAccumulator acc;
  while (auto rec = reader.next()) {
    const auto s = score_pair(rec->pair.id, *rec->alignment);
    acc.add(s);
    *tsv << s.id << '\t' << aa_cell(s) << '\n';
  }
  if (file.is_open() && !file.flush()) throw DataError("write failed for " + out_path_);

  const auto report = acc.summary();
  nlohmann::ordered_json doc;
  doc["inputs"] = reader.provenance();
  doc["aa"] = to_json(report);
  doc["kernel"] = kernels::to_string(kernels::active_isa());
  if (!out_path_.empty()) out_ << dump(doc) << '\n';
  if (!summary_.empty()) write_text(summary_, dump(doc) + "\n");
  err_ << "scored " << report.scored << " of " << report.total << " pairs; mean AA "
       << (report.mean_aa ? format_decimal(*report.mean_aa) : "n/a") << "; "
       << report.monotonic_count << " monotonic\n";
  return 0;
}

int Commands::filter() {
  FilterOptions options;
  options.threshold = threshold_;
  options.sample_size = sample_;
  options.seed = seed_;
  const auto stats = filter_monotonic_files(src_, tgt_, align_, prefix_, options);
  nlohmann::ordered_json doc = to_json(stats, options);
  out_ << dump(doc) << '\n';
  err_ << "kept " << stats.kept << " of " << stats.total << " pairs ("
       << stats.dropped_above_threshold << " above threshold, "
       << stats.dropped_unscoreable << " unscoreable, " << stats.dropped_by_sampling
       << " not sampled)\n";
  return 0;
}

int Commands::stats() {
  std::optional<fs::path> align;
  if (!align_.empty()) align = align_;
  const auto loaded = load_parallel(src_, tgt_, align);
  std::vector<StreamLog> logs;
  if (logs_ != "-") logs = read_logs(logs_, in_);
  auto report = dataset_stats(loaded.corpus, loaded.alignments, logs);
  if (logs_ != "-") report.inputs["annotation_logs"] = logs_;
  const auto text = dump(to_json(report)) + "\n";
  if (out_path_.empty()) {
    out_ << text;
  } else {
    write_text(out_path_, text);
  }
  const auto& c = report.corpus;
  err_ << "sentences " << format_decimal(c.at("sentences"));
  if (c.contains("al_full_sentence")) {
    err_ << "; full-sentence AL " << format_fixed(c.at("al_full_sentence"), 2);
  }
  if (c.contains("mean_aa")) err_ << "; AA " << format_fixed(c.at("mean_aa"), 2);
  if (c.contains("annotation_al")) {
    err_ << "; annotation AL " << format_fixed(c.at("annotation_al"), 2);
  }
  err_ << '\n';
  return 0;
}

int Commands::al() {
  const auto logs = read_logs(logs_, in_);
  out_ << "id\tAL\n";
  double sum = 0.0;
  for (const auto& log : logs) {
    DelayProfile profile;
    if (log.mode() == LogMode::kRetranslation) {
      if (!stabilized_) {
        throw DataError("log '" + log.id() +
                        "' is a retranslation log; AL is defined for streaming "
                        "logs (see --stabilized)");
      }
      profile = stabilized_delays(trace_from_log(log));
    } else {
      profile = delays_from_log(log);
    }
    if (profile.target_len == 0) {
      throw DataError("log '" + log.id() + "' writes no target tokens; AL is undefined");
    }
    const double value = average_lagging(profile);
    sum += value;
    out_ << log.id() << '\t' << format_decimal(value) << '\n';
  }
  const double mean = logs.empty() ? 0.0 : sum / static_cast<double>(logs.size());
  if (!summary_.empty()) {
    nlohmann::ordered_json doc;
    doc["metric"] = "AL";
    doc["count"] = logs.size();
    doc["mean"] = logs.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(mean);
    doc["parameters"] = {{"logs", logs_}, {"stabilized", stabilized_}};
    write_text(summary_, dump(doc) + "\n");
  }
  err_ << "mean AL " << (logs.empty() ? "n/a" : format_fixed(mean, 2)) << " over "
       << logs.size() << " logs\n";
  return 0;
}

int Commands::ne() {
  const auto logs = read_logs(logs_, in_);
  out_ << "id\tNE\n";
  double sum = 0.0;
  for (const auto& log : logs) {
    if (log.mode() != LogMode::kRetranslation) {
      throw DataError("log '" + log.id() + "' is a streaming log; NE needs a retranslation log");
    }
    double value = 0.0;
    try {
      value = normalized_erasure(trace_from_log(log));
    } catch (const UndefinedNE& e) {
      throw DataError("log '" + log.id() + "': " + e.what());
    }
    sum += value;
    out_ << log.id() << '\t' << format_decimal(value) << '\n';
  }
  const double mean = logs.empty() ? 0.0 : sum / static_cast<double>(logs.size());
  if (!summary_.empty()) {
    nlohmann::ordered_json doc;
    doc["metric"] = "NE";
    doc["count"] = logs.size();
    doc["mean"] = logs.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(mean);
    doc["parameters"] = {{"logs", logs_}};
    write_text(summary_, dump(doc) + "\n");
  }
  err_ << "mean NE " << (logs.empty() ? "n/a" : format_fixed(mean, 2)) << " over "
       << logs.size() << " logs\n";
  return 0;
}

int Commands::bleu() {
  const auto hyps = read_token_lines(hyp_);
  const auto refs = read_token_lines(ref_);
  if (hyps.size() != refs.size()) {
    throw DataError(hyp_ + " has " + std::to_string(hyps.size()) + " lines, " + ref_ +
                    " has " + std::to_string(refs.size()));
  }
  const auto smoothing = smoothing_from_string(smoothing_);
  const auto score = corpus_bleu(hyps, refs, smoothing);
  out_ << dump(to_json(score, smoothing)) << '\n';
  err_ << "BLEU = " << format_fixed(score.score, 1) << '\n';
  return 0;
}

int Commands::norm() {
  out_ << format_decimal(round_to(norm_score(model_, base_), 4)) << '\n';
  return 0;
}

int Commands::drop() {
  out_ << format_percent(drop_rate(high_, low_)) << '\n';
  return 0;
}

int Commands::bleu_stream_cmd() {
  const auto sys = read_logs(sys_, in_);
  const auto ref = read_logs(ref_, in_);
  const auto smoothing = smoothing_from_string(smoothing_);
  const auto score = bleu_stream(sys, ref, smoothing);
  out_ << dump(to_json(score, smoothing)) << '\n';
  err_ << "BLEU-Stream = " << format_fixed(score.score, 1) << '\n';
  return 0;
}

int Commands::waitk() {
  out_ << serialize_stream_log(waitk_path(src_len_, tgt_len_, k_, id_)) << '\n';
  return 0;
}

int Commands::validate() {
  const auto logs = read_logs(logs_, in_);
  std::vector<TokenSeq> sources;
  if (!src_.empty()) {
    sources = read_token_lines(src_);
    if (sources.size() != logs.size()) {
      throw DataError(src_ + " has " + std::to_string(sources.size()) + " lines but " +
                      std::to_string(logs.size()) + " logs were given");
    }
  }
  out_ << "id\tindex\tviolation\n";
  std::size_t bad_logs = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto violations = validate_log(logs[i], sources.empty() ? nullptr : &sources[i]);
    if (!violations.empty()) ++bad_logs;
    for (const auto& v : violations) {
      out_ << logs[i].id() << '\t' << (v.index ? std::to_string(*v.index) : "-") << '\t'
           << v.message << '\n';
    }
  }
  err_ << logs.size() - bad_logs << " of " << logs.size() << " logs valid\n";
  return bad_logs == 0 ? 0 : 2;
}

std::optional<fs::path> journal_dir_or_env(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  if (const char* env = std::getenv(kJournalDirEnv); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return std::nullopt;
}

int Commands::serve() {
  const auto dir = journal_dir_or_env(journal_dir_);
  if (!dir) {
    err_ << "warning: no --journal-dir or $" << kJournalDirEnv
         << "; sessions are kept in memory only\n";
  }
  SessionStore store(dir);
  ServerOptions options;
  if (!static_dir_.empty()) options.static_dir = static_dir_;
  AnnotationServer server(store, options);
  if (!server.bind(host_, port_)) {
    throw DataError("cannot bind " + host_ + ":" + std::to_string(port_));
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread waiter([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  waiter.detach();

  err_ << "serving on http://" << host_ << ":" << port_ << std::endl;
  server.listen_after_bind();
  return 0;
}

int Commands::export_cmd() {
  const auto dir = journal_dir_or_env(journal_dir_);
  if (!dir) throw DataError(std::string("no --journal-dir or $") + kJournalDirEnv);
  if (!fs::is_directory(*dir)) throw DataError("journal directory " + dir->string() + " not found");
  SessionStore store(dir);
  const auto exported = store.export_all();
  write_text(prefix_ + ".ref", exported.references);
  write_text(prefix_ + ".jsonl", exported.logs);
  const auto count = store.sessions().size();
  err_ << "exported " << count << " sessions to " << prefix_ << ".{ref,jsonl}\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Simultaneous translation evaluation and monotonic corpus tools", "simulmt"};
  app.require_subcommand(1);
  Commands commands(in, out, err);
  commands.install(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  try {
    return commands.run(app);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace simulmt
