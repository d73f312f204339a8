// rasp: command-line front end for the proxy, the server and the benches.

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "rasp/attack.h"
#include "rasp/bench.h"
#include "rasp/config.h"
#include "rasp/datagen.h"
#include "rasp/filter.h"
#include "rasp/index_store.h"
#include "rasp/ingest.h"
#include "rasp/net.h"
#include "rasp/proxy.h"
#include "rasp/storage.h"

namespace fs = std::filesystem;
using namespace rasp;

namespace {

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }

// Writes a report to a file, or stdout when path is empty or "-".
void emit(const Report& r, const std::string& path) {
  if (path.empty() || path == "-") {
    r.write_csv(std::cout);
    return;
  }
  std::ofstream out(path);
  enforce(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path);
  r.write_csv(out);
}

std::uint64_t fresh_session() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) | rd();
}

// host:port
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& s) {
  const auto colon = s.rfind(':');
  enforce(colon != std::string::npos && colon > 0, ErrorCode::kInvalidArgument,
          "server must be host:port, got '" + s + "'");
  const int port = std::stoi(s.substr(colon + 1));
  enforce(port > 0 && port < 65536, ErrorCode::kInvalidArgument, "bad port in '" + s + "'");
  return {s.substr(0, colon), static_cast<std::uint16_t>(port)};
}

Matrix generate(const std::string& kind, std::size_t n, std::size_t d, std::uint64_t seed,
                std::vector<std::string>& names, std::vector<bool>& categorical) {
  if (kind == "adult") {
    SyntheticTable t = adult_like_table(n, seed);
    names = t.names;
    categorical = t.categorical;
    return std::move(t.values);
  }
  Matrix m;
  if (kind == "uniform") m = uniform_table(n, d, seed);
  else if (kind == "gaussian") m = gaussian_table(n, d, seed);
  else if (kind == "nongaussian") m = non_gaussian_table(n, d, seed);
  else throw Error(ErrorCode::kInvalidArgument, "unknown generator '" + kind + "'");
  names.clear();
  for (std::size_t j = 0; j < d; ++j) names.push_back("c" + std::to_string(j));
  categorical.assign(d, false);
  return m;
}

// Where a proxy-side command sends its queries.
struct BackendChoice {
  std::string server;
  std::string data;
  std::string index;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--server", server, "Query a running server at host:port");
    cmd->add_option("--data", data, "Query a perturbed dataset in-process instead");
    cmd->add_option("--index", index, "Index for --data (rebuilt when omitted)");
  }
};

struct OpenBackend {
  std::unique_ptr<IndexStore> store;
  std::unique_ptr<QueryBackend> backend;
};

OpenBackend open_backend(const BackendChoice& c, const ServiceConfig& cfg) {
  OpenBackend b;
  enforce(c.server.empty() != c.data.empty(), ErrorCode::kInvalidArgument,
          "give exactly one of --server or --data");
  if (!c.server.empty()) {
    const auto [host, port] = parse_endpoint(c.server);
    b.backend = std::make_unique<RemoteBackend>(host, port, fresh_session());
    return b;
  }
  auto records = load_dataset(c.data);
  b.store = c.index.empty()
                ? std::make_unique<IndexStore>(std::move(records), cfg.capacity, cfg.split)
                : std::make_unique<IndexStore>(load_index(c.index, std::move(records)));
  b.backend = std::make_unique<LocalBackend>(*b.store);
  return b;
}

// Query point from "v1,v2,..." (searchable column order) or "name=v,...".
Vec parse_point(const std::string& text, const DatasetManifest& m) {
  const auto parts = split_fields(text, ',');
  Vec raw(m.dimensions(), std::numeric_limits<double>::quiet_NaN());
  const bool named = text.find('=') != std::string::npos;
  if (!named) {
    enforce(parts.size() == m.dimensions(), ErrorCode::kInvalidArgument,
            "point needs " + std::to_string(m.dimensions()) + " values");
    for (std::size_t j = 0; j < parts.size(); ++j) raw[j] = m.raw_value(j, parts[j]);
  } else {
    for (const auto& p : parts) {
      const auto eq = p.find('=');
      enforce(eq != std::string::npos, ErrorCode::kInvalidArgument, "expected name=value: " + p);
      const std::size_t dim = m.dimension_of(p.substr(0, eq));
      raw[dim] = m.raw_value(dim, p.substr(eq + 1));
    }
    for (std::size_t j = 0; j < raw.size(); ++j) {
      enforce(!std::isnan(raw[j]), ErrorCode::kInvalidArgument,
              "point is missing column " + m.searchable(j).name);
    }
  }
  return m.normalization.normalize(raw);
}

void print_timing(const ProxyTiming& t, const BlockCounter& blocks, std::size_t rows) {
  std::fprintf(stderr,
               "rows=%zu pre_ms=%.3f server_ms=%.3f post_ms=%.3f round_trips=%zu "
               "index_blocks=%llu data_blocks=%llu\n",
               rows, 1e3 * t.pre_seconds, 1e3 * t.server_seconds, 1e3 * t.post_seconds,
               t.round_trips, static_cast<unsigned long long>(blocks.index_blocks),
               static_cast<unsigned long long>(blocks.data_blocks));
}

void print_rows(const DatasetManifest& m, const std::vector<DecryptedRow>& rows,
                const std::vector<double>* distances = nullptr) {
  Report r;
  r.header.push_back("id");
  if (distances) r.header.push_back("distance");
  for (const auto& c : m.columns) r.header.push_back(c.name);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> row{std::to_string(rows[i].id)};
    if (distances) row.push_back(fmt((*distances)[i], 9));
    for (auto& cell : render_row(m, rows[i].record)) row.push_back(std::move(cell));
    r.add(std::move(row));
  }
  r.write_csv(std::cout);
}

Report attack_report(const std::string& name, const std::vector<AttackReport>& reports) {
  Report r;
  r.header = {"attack", "round", "min", "mean", "max", "resilient", "per_dimension"};
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::string dims;
    for (double v : reports[i].per_dimension) dims += (dims.empty() ? "" : " ") + fmt(v, 4);
    r.add({name, std::to_string(i), fmt(reports[i].min), fmt(reports[i].mean),
           fmt(reports[i].max), reports[i].resilient ? "yes" : "no", dims});
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range and kNN queries over RASP-perturbed data"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "JSON config (default: $RASP_CONFIG)");
  std::uint64_t seed_override = 0;
  app.add_option("--seed", seed_override, "Override the configured key seed");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a CSV into normalized plaintext records");
  std::string in_csv, in_schema, in_plain = "plain.rpln", in_manifest = "manifest.json",
              in_generate, in_csv_out;
  std::size_t gen_n = 10000, gen_d = 5;
  char delimiter = ',';
  ingest->add_option("--csv", in_csv, "Input file with a header row");
  ingest->add_option("--schema", in_schema, "name:num|cat|payload,... (file column order)");
  ingest->add_option("--delimiter", delimiter, "Field delimiter");
  ingest->add_option("--generate", in_generate, "Synthesize input: uniform|gaussian|nongaussian|adult")
      ->check(CLI::IsMember({"uniform", "gaussian", "nongaussian", "adult"}));
  ingest->add_option("--n", gen_n, "Rows to synthesize")->check(CLI::PositiveNumber);
  ingest->add_option("--d", gen_d, "Columns to synthesize")->check(CLI::PositiveNumber);
  ingest->add_option("--csv-out", in_csv_out, "Where to keep the synthesized CSV");
  ingest->add_option("--plain", in_plain, "Output plaintext records");
  ingest->add_option("--manifest", in_manifest, "Output manifest");

  // keygen
  auto* kg = app.add_subcommand("keygen", "Train OPE tables and draw the secret matrix");
  std::string kg_plain = "plain.rpln", kg_key = "key.rkey";
  kg->add_option("--plain", kg_plain, "Training records");
  kg->add_option("--key", kg_key, "Output key file");

  // perturb
  auto* pt = app.add_subcommand("perturb", "Perturb and seal plaintext records");
  std::string pt_plain = "plain.rpln", pt_key = "key.rkey", pt_out = "data.rdat";
  pt->add_option("--plain", pt_plain, "Plaintext records");
  pt->add_option("--key", pt_key, "Key file");
  pt->add_option("--out", pt_out, "Output perturbed dataset");

  // index
  auto* ix = app.add_subcommand("index", "Build the R-tree over a perturbed dataset");
  std::string ix_data = "data.rdat", ix_out = "data.ridx";
  ix->add_option("--data", ix_data, "Perturbed dataset");
  ix->add_option("--out", ix_out, "Output index");

  // serve
  auto* sv = app.add_subcommand("serve", "Host a perturbed dataset (no key needed)");
  std::string sv_data, sv_index, sv_port_file;
  std::optional<std::string> sv_host;
  std::optional<std::uint16_t> sv_port;
  sv->add_option("--data", sv_data, "Perturbed dataset (empty: wait for an upload)");
  sv->add_option("--index", sv_index, "Index for the dataset (rebuilt when omitted)");
  sv->add_option("--host", sv_host, "Listen address");
  sv->add_option("--port", sv_port, "Listen port (0 picks one)");
  sv->add_option("--port-file", sv_port_file, "Write the bound port here once listening");

  // query
  auto* qy = app.add_subcommand("query", "Range query from a filter expression");
  std::string qy_key = "key.rkey", qy_manifest = "manifest.json", qy_filter;
  BackendChoice qy_backend;
  qy->add_option("--key", qy_key, "Key file");
  qy->add_option("--manifest", qy_manifest, "Dataset manifest");
  qy->add_option("--filter", qy_filter, "e.g. \"age >= 30 and sex = Male or hours < 20\"")
      ->required();
  qy_backend.add_to(qy);

  // knn
  auto* kn = app.add_subcommand("knn", "k nearest neighbors of a point");
  std::string kn_key = "key.rkey", kn_manifest = "manifest.json", kn_point;
  std::size_t kn_k = 1;
  std::optional<std::size_t> kn_delta;
  std::optional<std::string> kn_policy;
  BackendChoice kn_backend;
  kn->add_option("--key", kn_key, "Key file");
  kn->add_option("--manifest", kn_manifest, "Dataset manifest");
  kn->add_option("--point", kn_point, "v1,v2,... or name=v,...")->required();
  kn->add_option("--k", kn_k, "Neighbors")->check(CLI::PositiveNumber);
  kn->add_option("--delta", kn_delta, "Slack on the inner range count");
  kn->add_option("--bound", kn_policy, "Initial upper range: user|center|full")
      ->check(CLI::IsMember({"user", "center", "full"}));
  kn_backend.add_to(kn);

  // attack
  auto* at = app.add_subcommand("attack", "Attack perturbed synthetic data and score NR_MSE");
  at->require_subcommand(1);
  std::string at_out, at_kind = "nongaussian";
  std::size_t at_d = 10, at_n = 10000, at_keys = 50, at_candidates = 20;
  bool at_no_ope = false;
  auto* at_ica = at->add_subcommand("ica", "FastICA over many random keys");
  auto* at_wc = at->add_subcommand("worst-case", "Independent draws from known distributions");
  auto* at_naive = at->add_subcommand("naive", "Random inverse candidates sharing the 1-row");
  for (auto* c : {at_ica, at_wc, at_naive}) {
    c->add_option("--dims", at_d, "Columns")->check(CLI::PositiveNumber);
    c->add_option("--n", at_n, "Rows")->check(CLI::Range(2, 100000000));
    c->add_option("--data", at_kind, "uniform|gaussian|nongaussian")
        ->check(CLI::IsMember({"uniform", "gaussian", "nongaussian"}));
    c->add_option("--out", at_out, "Report file (default stdout)");
  }
  at_ica->add_option("--keys", at_keys, "Random keys")->check(CLI::PositiveNumber);
  at_ica->add_flag("--no-ope", at_no_ope, "Skip OPE (matrix perturbation only)");
  at_naive->add_option("--candidates", at_candidates, "Candidate inverses")
      ->check(CLI::PositiveNumber);

  // bench
  auto* bn = app.add_subcommand("bench", "Desk-scale experiments, CSV reports");
  bn->require_subcommand(1);
  std::string bn_out;
  RangeBenchOptions br;
  KnnBenchOptions bk;
  PerturbBenchOptions bp;
  std::vector<std::size_t> bk_dims;
  std::optional<std::string> bk_policy;
  std::string br_split = "rstar";
  auto* bn_range = bn->add_subcommand("range", "Stage-1 block accesses vs a linear scan");
  bn_range->add_option("--n", br.n)->check(CLI::PositiveNumber);
  bn_range->add_option("--d", br.d)->check(CLI::PositiveNumber);
  bn_range->add_option("--range", br.range, "Interval width per dimension")
      ->check(CLI::Range(1e-9, 1.0));
  bn_range->add_option("--queries", br.queries)->check(CLI::PositiveNumber);
  bn_range->add_option("--capacity", br.capacity)->check(CLI::Range(4, 100000));
  bn_range->add_option("--split", br_split)->check(CLI::IsMember({"rstar", "quadratic"}));
  auto* bn_knn = bn->add_subcommand("knn", "kNN precision and round trips");
  bn_knn->add_option("--n", bk.n)->check(CLI::PositiveNumber);
  bn_knn->add_option("--d", bk_dims, "One or more dimensionalities")->delimiter(',');
  bn_knn->add_option("--k", bk.k)->check(CLI::PositiveNumber);
  bn_knn->add_option("--delta", bk.delta);
  bn_knn->add_option("--queries", bk.queries)->check(CLI::PositiveNumber);
  bn_knn->add_option("--bound", bk_policy)->check(CLI::IsMember({"user", "center", "full"}));
  auto* bn_perturb = bn->add_subcommand("perturb", "Key generation and perturbation time");
  bn_perturb->add_option("--n", bp.n)->check(CLI::PositiveNumber);
  bn_perturb->add_option("--d", bp.d)->check(CLI::PositiveNumber);
  for (auto* c : {bn_range, bn_knn, bn_perturb}) c->add_option("--out", bn_out, "Report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::optional<fs::path> cfg_path;
    if (config_path) cfg_path = *config_path;
    ServiceConfig cfg = load_config(cfg_path);
    if (app.get_option("--seed")->count() > 0) cfg.key_seed = seed_override;

    if (*ingest) {
      enforce(in_csv.empty() != in_generate.empty(), ErrorCode::kInvalidArgument,
              "give exactly one of --csv or --generate");
      IngestResult res;
      if (!in_generate.empty()) {
        std::vector<std::string> names;
        std::vector<bool> cat;
        const Matrix m = generate(in_generate, gen_n, gen_d, cfg.key_seed, names, cat);
        std::vector<ColumnSchema> schema;
        for (std::size_t j = 0; j < names.size(); ++j)
          schema.push_back({names[j], cat[j] ? ColumnKind::kCategorical : ColumnKind::kNumeric});
        const std::string csv = table_to_csv(m, names);
        if (!in_csv_out.empty()) {
          write_file(in_csv_out, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()),
                                           csv.size()));
        }
        res = ingest_text(csv, schema, ',', "generated:" + in_generate);
      } else {
        enforce(!in_schema.empty(), ErrorCode::kInvalidArgument, "--csv needs --schema");
        res = ingest_csv(in_csv, parse_schema(in_schema), delimiter);
      }
      for (const auto& r : res.rejected)
        std::fprintf(stderr, "rejected line %zu: %s\n", r.line, r.reason.c_str());
      save_plain(in_plain, res.records);
      save_manifest(in_manifest, res.manifest);
      std::fprintf(stderr, "ingested %zu records (%zu rejected), %zu searchable columns\n",
                   res.records.size(), res.rejected.size(), res.manifest.dimensions());
      return 0;
    }

    if (*kg) {
      const auto plain = load_plain(kg_plain);
      enforce(!plain.empty(), ErrorCode::kInvalidArgument, "no training records");
      Matrix t(plain.size(), plain.front().values.size());
      for (std::size_t i = 0; i < plain.size(); ++i) {
        enforce(plain[i].values.size() == t.cols(), ErrorCode::kInvalidArgument,
                "ragged plaintext records");
        std::copy(plain[i].values.begin(), plain[i].values.end(), t.row(i).begin());
      }
      const RaspKey key = keygen(t, cfg.key_seed, cfg.keygen_options());
      save_key(kg_key, key);
      std::fprintf(stderr, "key for %zu dimensions written to %s\n", key.dimensions(),
                   kg_key.c_str());
      return 0;
    }

    if (*pt) {
      const RaspKey key = load_key(pt_key);
      const auto plain = load_plain(pt_plain);
      const auto out = perturb_dataset(key, plain, cfg.noise_seed);
      save_dataset(pt_out, out);
      std::fprintf(stderr, "%zu records perturbed to %s\n", out.size(), pt_out.c_str());
      return 0;
    }

    if (*ix) {
      IndexStore store(load_dataset(ix_data), cfg.capacity, cfg.split);
      save_index(ix_out, store.tree());
      std::fprintf(stderr, "index: %zu records, height %zu, %zu nodes\n", store.size(),
                   store.tree().height(), store.tree().node_count());
      return 0;
    }

    if (*sv) {
      std::shared_ptr<const IndexStore> store;
      if (!sv_data.empty()) {
        auto records = load_dataset(sv_data);
        store = sv_index.empty()
                    ? std::make_shared<const IndexStore>(std::move(records), cfg.capacity, cfg.split)
                    : std::make_shared<const IndexStore>(load_index(sv_index, std::move(records)));
      }
      ServerOptions so;
      so.host = sv_host.value_or(cfg.host);
      so.port = sv_port.value_or(cfg.port);
      so.capacity = cfg.capacity;
      so.split = cfg.split;
      QueryServer server(store, so);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.start();
      if (!sv_port_file.empty()) {
        const std::string p = std::to_string(server.port()) + "\n";
        write_file(sv_port_file, std::span(reinterpret_cast<const std::uint8_t*>(p.data()), p.size()));
      }
      std::fprintf(stderr, "listening on %s:%u (%zu records)\n", so.host.c_str(), server.port(),
                   store ? store->size() : std::size_t{0});
      while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      std::fprintf(stderr, "served %zu requests\n", server.served_requests());
      return 0;
    }

    if (*qy) {
      const RaspKey key = load_key(qy_key);
      const DatasetManifest m = load_manifest(qy_manifest);
      enforce(m.dimensions() == key.dimensions(), ErrorCode::kInvalidArgument,
              "manifest and key disagree on dimensionality");
      const auto disjuncts = resolve_filter(parse_filter(qy_filter), m);
      OpenBackend b = open_backend(qy_backend, cfg);
      Proxy proxy(key, *b.backend);
      const RangeAnswer a = proxy.filter(disjuncts);
      print_rows(m, a.rows);
      print_timing(a.timing, a.counters, a.rows.size());
      return 0;
    }

    if (*kn) {
      const RaspKey key = load_key(kn_key);
      const DatasetManifest m = load_manifest(kn_manifest);
      enforce(m.dimensions() == key.dimensions(), ErrorCode::kInvalidArgument,
              "manifest and key disagree on dimensionality");
      const Vec q = parse_point(kn_point, m);
      KnnOptions o = cfg.knn_options(kn_k);
      if (kn_delta) o.delta = *kn_delta;
      if (kn_policy) o.bounds.policy = parse_bound_policy(*kn_policy);
      OpenBackend b = open_backend(kn_backend, cfg);
      Proxy proxy(key, *b.backend);
      const KnnAnswer a = proxy.knn(q, o);
      std::vector<DecryptedRow> rows;
      std::vector<double> dist;
      for (const auto& nb : a.result.neighbors) {
        rows.push_back({nb.id, nb.record});
        dist.push_back(nb.distance);
      }
      print_rows(m, rows, &dist);
      print_timing(a.timing, a.result.outer_blocks, rows.size());
      std::fprintf(stderr, "rounds=%zu inner_count=%zu candidates=%zu upper_attempts=%zu\n",
                   a.result.inner.rounds, a.result.inner.count, a.result.candidates,
                   a.result.upper_attempts);
      return 0;
    }

    if (*at) {
      std::vector<std::string> names;
      std::vector<bool> cat;
      const Matrix raw = generate(at_kind, at_n, at_d, cfg.key_seed, names, cat);
      const Matrix original = normalize_dataset(raw).first;
      if (*at_ica) {
        KeySweepOptions o;
        o.keys = at_keys;
        o.with_ope = !at_no_ope;
        o.seed = cfg.key_seed;
        o.keygen = cfg.keygen_options();
        const KeySweepReport r = ica_key_sweep(original, o);
        Report rep = attack_report(at_no_ope ? "ica-without-ope" : "ica-with-ope", r.per_key);
        emit(rep, at_out);
        std::fprintf(stderr, "best=%.4f worst=%.4f average=%.4f\n", r.best, r.worst, r.average);
        return 0;
      }
      if (*at_wc) {
        std::vector<KnownDistribution> known;
        for (std::size_t j = 0; j < original.cols(); ++j) {
          known.push_back(at_kind == "gaussian" ? KnownDistribution::normal(0.0, 1.0)
                                                : KnownDistribution::empirical(original.column(j)));
        }
        const Matrix est = worst_case_estimator(known, original.rows(), cfg.key_seed + 1);
        emit(attack_report("worst-case", {score_estimate("worst-case", original, est)}), at_out);
        return 0;
      }
      const RaspKey key = keygen(original, cfg.key_seed, cfg.keygen_options());
      Matrix encoded = original;
      for (std::size_t r = 0; r < original.rows(); ++r) {
        const Vec e = key.ope.encrypt(original.row(r));
        std::copy(e.begin(), e.end(), encoded.row(r).begin());
      }
      Rng rng(cfg.noise_seed);
      const Matrix perturbed = perturb_matrix(key.a, encoded, key.noise, rng);
      const NaiveAuditReport a =
          naive_candidate_audit(perturbed, key, original, at_candidates, cfg.key_seed + 2);
      Report rep;
      rep.header = {"candidate", "min_nr_mse"};
      for (std::size_t i = 0; i < a.candidate_min_nr_mse.size(); ++i)
        rep.add({std::to_string(i), fmt(a.candidate_min_nr_mse[i])});
      emit(rep, at_out);
      std::fprintf(stderr,
                   "homogeneous_max_error=%.3g candidates=%zu valid=%zu far(>=threshold)=%zu\n",
                   a.homogeneous_max_error, a.candidates, a.valid_candidates, a.far_candidates);
      return 0;
    }

    if (*bn) {
      if (*bn_range) {
        br.seed = cfg.key_seed;
        br.split = br_split == "rstar" ? SplitPolicy::kRStar : SplitPolicy::kQuadratic;
        emit(range_report(br, bench_range(br)), bn_out);
      } else if (*bn_knn) {
        if (bk_dims.empty()) bk_dims = {2};
        bk.seed = cfg.key_seed;
        bk.bounds = cfg.bounds;
        if (bk_policy) bk.bounds.policy = parse_bound_policy(*bk_policy);
        std::vector<std::pair<KnnBenchOptions, KnnBenchSummary>> runs;
        for (std::size_t d : bk_dims) {
          KnnBenchOptions o = bk;
          o.d = d;
          runs.emplace_back(o, bench_knn(o));
        }
        emit(knn_report(runs), bn_out);
      } else {
        bp.seed = cfg.key_seed;
        emit(perturb_report(bp, bench_perturb(bp)), bn_out);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", std::string(error_code_name(e.code())).c_str(),
                 e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
