// Command-line front end: builds and updates frequency-tree documents from
// transaction logs, answers frequent-itemset and rule queries, verifies tree
// counters against the exact oracle, and runs the benchmark harness.
//
// Exit codes: 0 success, 1 error, 2 verification found undercounts.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fxt/bench.hpp>
#include <fxt/mining.hpp>
#include <fxt/oracle.hpp>
#include <fxt/rational.hpp>
#include <fxt/serialize.hpp>
#include <fxt/transactions.hpp>
#include <fxt/tree.hpp>

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

fxt::Fxt load_tree(const std::string& path) {
  auto in = open_input(path);
  return fxt::load_fxt(in);
}

fxt::LogFormat parse_log_format(std::istream& in, const std::string& flag) {
  if (flag == "xml") return fxt::LogFormat::xml;
  if (flag == "text") return fxt::LogFormat::text;
  return fxt::detect_log_format(in);
}

fxt::FxtFormat tree_format_from_flag(const std::string& flag) {
  return flag == "canonical" ? fxt::FxtFormat::canonical
                             : fxt::FxtFormat::paper_compatible;
}

fxt::Ratio parse_threshold(const std::string& s, const char* what) {
  fxt::Ratio r = fxt::parse_decimal_ratio(s, what);
  if (r > fxt::Ratio{1, 1})
    throw CLI::ValidationError(std::string(what) + " must be within [0,1]");
  return r;
}

void write_document(const fxt::Fxt& tree, const std::string& path,
                    fxt::FxtFormat format) {
  auto out = open_output(path);
  fxt::dump_fxt(tree, format, out);
}

std::size_t max_depth(const fxt::FxtNode& node) {
  std::size_t deepest = node.depth();
  for (const fxt::FxtNode* c : node.children())
    deepest = std::max(deepest, max_depth(*c));
  return deepest;
}

int cmd_build(const std::string& input, const std::string& output,
              const std::string& tree_format, const std::string& log_format) {
  auto in = open_input(input);
  const fxt::LogFormat lf = parse_log_format(in, log_format);
  fxt::Fxt tree;
  fxt::parse_transactions(in, lf, [&](fxt::NormalizedTransaction t) {
    tree.insert(t);
  });
  write_document(tree, output, tree_format_from_flag(tree_format));
  std::cout << "transactions: " << tree.root_counter()
            << ", nodes: " << tree.node_count() << '\n';
  return 0;
}

int cmd_insert(const std::string& fxt_path, const std::string& input,
               const std::string& output, const std::string& tree_format,
               const std::string& log_format) {
  fxt::Fxt tree = load_tree(fxt_path);
  auto in = open_input(input);
  const fxt::LogFormat lf = parse_log_format(in, log_format);
  fxt::parse_transactions(in, lf, [&](fxt::NormalizedTransaction t) {
    tree.insert(t);
  });
  write_document(tree, output.empty() ? fxt_path : output,
                 tree_format_from_flag(tree_format));
  std::cout << "transactions: " << tree.root_counter()
            << ", nodes: " << tree.node_count() << '\n';
  return 0;
}

int cmd_frequent(const std::string& fxt_path, const std::string& min_support,
                 const std::string& format, const std::string& output) {
  const fxt::Ratio threshold = parse_threshold(min_support, "--min-support");
  const fxt::Fxt tree = load_tree(fxt_path);
  const auto itemsets = fxt::frequent_itemsets(tree, threshold);
  std::ostringstream buf;
  if (format == "csv") {
    fxt::write_frequent_csv(itemsets, buf);
  } else {
    fxt::write_frequent_xml(itemsets, buf);
  }
  if (output.empty()) {
    std::cout << buf.str();
  } else {
    open_output(output) << buf.str();
  }
  return 0;
}

int cmd_rules(const std::string& fxt_path, const std::string& min_support,
              const std::string& min_confidence, const std::string& format,
              const std::string& output) {
  fxt::MiningParams params;
  params.min_support = parse_threshold(min_support, "--min-support");
  params.min_confidence = parse_threshold(min_confidence, "--min-confidence");
  const fxt::Fxt tree = load_tree(fxt_path);
  const auto rules = fxt::association_rules(tree, params);
  std::ostringstream buf;
  if (format == "csv") {
    fxt::write_rules_csv(rules, buf);
  } else {
    fxt::write_rules_xml(rules, buf);
  }
  if (output.empty()) {
    std::cout << buf.str();
  } else {
    open_output(output) << buf.str();
  }
  return 0;
}

int cmd_verify(const std::string& fxt_path, const std::string& log_path,
               const std::string& log_format, const std::string& output) {
  const fxt::Fxt tree = load_tree(fxt_path);
  auto in = open_input(log_path);
  const fxt::LogFormat lf = parse_log_format(in, log_format);
  fxt::TransactionLog log;
  fxt::parse_transactions(in, lf, [&](fxt::NormalizedTransaction t) {
    log.transactions.push_back(std::move(t));
  });
  const fxt::SoundnessReport report = fxt::verify_soundness(tree, log);
  std::cout << fxt::soundness_summary(report) << '\n';
  if (output.empty()) {
    if (!report.clean()) fxt::write_soundness_csv(report, std::cout);
  } else {
    auto out = open_output(output);
    fxt::write_soundness_csv(report, out);
  }
  return report.clean() ? 0 : 2;
}

int cmd_gen(std::uint64_t seed, std::size_t n, std::size_t alphabet,
            std::size_t avg_len, const std::string& format,
            const std::string& output) {
  const fxt::TransactionLog log =
      fxt::generate_synthetic(seed, n, alphabet, avg_len);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!output.empty()) {
    file = open_output(output);
    out = &file;
  }
  if (format == "text") {
    fxt::write_transactions_text(log, *out);
  } else {
    fxt::write_transactions_xml(log, *out);
  }
  return 0;
}

int cmd_stats(const std::string& fxt_path) {
  const fxt::Fxt tree = load_tree(fxt_path);
  std::size_t depth = 0;
  for (const fxt::FxtNode* b : tree.breadth())
    depth = std::max(depth, max_depth(*b));
  const std::string doc = fxt::dump_fxt(tree, fxt::FxtFormat::canonical);
  std::cout << "transactions: " << tree.root_counter() << '\n'
            << "nodes: " << tree.node_count() << '\n'
            << "breadth_items: " << tree.breadth().size() << '\n'
            << "max_depth: " << depth << '\n'
            << "serialized_bytes: " << doc.size() << '\n';
  return 0;
}

int cmd_bench(std::size_t n, std::size_t alphabet, std::size_t avg_len,
              std::uint64_t seed, const std::vector<std::string>& supports,
              bool baseline, const std::string& output,
              const std::string& plot_data) {
  fxt::BenchConfig config;
  config.n_transactions = n;
  config.alphabet_size = alphabet;
  config.avg_len = avg_len;
  config.seed = seed;
  config.run_baseline = baseline;
  for (const auto& s : supports)
    config.supports.push_back(parse_threshold(s, "--supports"));

  const fxt::BenchReport report = fxt::run_bench(config);
  if (output.empty()) {
    fxt::write_bench_csv(report, std::cout);
  } else {
    auto out = open_output(output);
    fxt::write_bench_csv(report, out);
  }
  if (!plot_data.empty()) {
    auto out = open_output(plot_data);
    fxt::write_bench_plot_data(report, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental frequency-tree mining over transaction logs"};
  app.require_subcommand(1);

  std::string input, output, fxt_path, log_path;
  std::string min_support = "0.25", min_confidence = "0.5";
  std::string format;
  std::string log_format = "auto";
  std::string tree_format = "paper";
  std::uint64_t seed = 1;
  std::size_t n_transactions = 10000, alphabet = 100, avg_len = 15;
  std::vector<std::string> supports;
  bool baseline = false;
  std::string plot_data;

  auto* build = app.add_subcommand("build", "Build a tree document from a log");
  build->add_option("--input", input, "transaction log (XML or text)")
      ->required();
  build->add_option("--output", output, "tree document to write")->required();
  build->add_option("--format", tree_format, "tree format: paper|canonical")
      ->check(CLI::IsMember({"paper", "canonical"}));
  build->add_option("--log-format", log_format, "input format: auto|xml|text")
      ->check(CLI::IsMember({"auto", "xml", "text"}));

  auto* insert =
      app.add_subcommand("insert", "Insert new transactions into a tree");
  insert->add_option("--fxt", fxt_path, "existing tree document")->required();
  insert->add_option("--input", input, "transactions to insert")->required();
  insert->add_option("--output", output,
                     "where to write the tree (default: rewrite --fxt)");
  insert->add_option("--format", tree_format, "tree format: paper|canonical")
      ->check(CLI::IsMember({"paper", "canonical"}));
  insert->add_option("--log-format", log_format, "input format: auto|xml|text")
      ->check(CLI::IsMember({"auto", "xml", "text"}));

  auto* frequent =
      app.add_subcommand("frequent", "Query frequent itemsets from a tree");
  frequent->add_option("--fxt", fxt_path, "tree document")->required();
  frequent->add_option("--min-support", min_support, "threshold in [0,1]");
  frequent->add_option("--format", format, "output format: xml|csv")
      ->check(CLI::IsMember({"xml", "csv"}));
  frequent->add_option("--output", output, "output file (default: stdout)");

  auto* rules =
      app.add_subcommand("rules", "Query association rules from a tree");
  rules->add_option("--fxt", fxt_path, "tree document")->required();
  rules->add_option("--min-support", min_support, "threshold in [0,1]");
  rules->add_option("--min-confidence", min_confidence, "threshold in [0,1]");
  rules->add_option("--format", format, "output format: xml|csv")
      ->check(CLI::IsMember({"xml", "csv"}));
  rules->add_option("--output", output, "output file (default: stdout)");

  auto* verify = app.add_subcommand(
      "verify", "Check tree counters against the exact counts of a log");
  verify->add_option("--fxt", fxt_path, "tree document")->required();
  verify->add_option("--log", log_path, "log the tree was built from")
      ->required();
  verify->add_option("--log-format", log_format, "log format: auto|xml|text")
      ->check(CLI::IsMember({"auto", "xml", "text"}));
  verify->add_option("--output", output, "discrepancy CSV (default: stdout)");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic transaction log");
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("--transactions", n_transactions, "number of transactions");
  gen->add_option("--alphabet", alphabet, "number of distinct items");
  gen->add_option("--avg-len", avg_len, "average transaction length");
  gen->add_option("--format", format, "output format: xml|text")
      ->check(CLI::IsMember({"xml", "text"}));
  gen->add_option("--output", output, "output file (default: stdout)");

  auto* stats = app.add_subcommand("stats", "Print statistics of a tree document");
  stats->add_option("--fxt", fxt_path, "tree document")->required();

  auto* bench = app.add_subcommand(
      "bench", "Benchmark build latency and mining against the baseline");
  bench->add_option("--transactions", n_transactions, "number of transactions");
  bench->add_option("--alphabet", alphabet, "number of distinct items");
  bench->add_option("--avg-len", avg_len, "average transaction length");
  bench->add_option("--seed", seed, "RNG seed");
  bench->add_option("--supports", supports,
                    "support thresholds to mine at (repeatable)");
  bench->add_flag("--baseline", baseline, "also time the Apriori baseline");
  bench->add_option("--output", output, "report CSV (default: stdout)");
  bench->add_option("--plot-data", plot_data, "gnuplot latency data file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed())
      return cmd_build(input, output, tree_format, log_format);
    if (insert->parsed())
      return cmd_insert(fxt_path, input, output, tree_format, log_format);
    if (frequent->parsed())
      return cmd_frequent(fxt_path, min_support, format, output);
    if (rules->parsed())
      return cmd_rules(fxt_path, min_support, min_confidence, format, output);
    if (verify->parsed())
      return cmd_verify(fxt_path, log_path, log_format, output);
    if (gen->parsed())
      return cmd_gen(seed, n_transactions, alphabet, avg_len, format, output);
    if (stats->parsed()) return cmd_stats(fxt_path);
    if (bench->parsed()) {
      if (supports.empty()) supports = {"0.2", "0.4", "0.6"};
      return cmd_bench(n_transactions, alphabet, avg_len, seed, supports,
                       baseline, output, plot_data);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
