#include "lcgnn/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lcgnn {

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
    return buf;
}

}  // namespace

SeedAggregate aggregate_seeds(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("aggregate_seeds: no values");
    SeedAggregate a;
    a.values.assign(values.begin(), values.end());
    // Sorted summation makes the result independent of seed order.
    std::vector<double> sorted = a.values;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    a.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    if (sorted.size() > 1) {
        double ss = 0.0;
        for (double v : sorted) ss += (v - a.mean) * (v - a.mean);
        a.stddev = std::sqrt(ss / (n - 1.0));
    }
    return a;
}

std::vector<std::optional<double>> node_label_consistency(const CsrMatrix& graph,
                                                          std::span<const Label> labels) {
    if (labels.size() != graph.n()) {
        throw std::invalid_argument("node_label_consistency: label count differs from node count");
    }
    std::vector<std::optional<double>> out(graph.n());
    for (std::size_t i = 0; i < graph.n(); ++i) {
        const auto nbrs = graph.row_cols(i);
        if (nbrs.empty()) continue;
        std::size_t same = 0;
        for (std::size_t j : nbrs) same += labels[j] == labels[i] ? 1 : 0;
        out[i] = static_cast<double>(same) / static_cast<double>(nbrs.size());
    }
    return out;
}

std::size_t consistency_bucket(double consistency, std::size_t buckets) noexcept {
    const double scaled = std::floor(consistency * static_cast<double>(buckets));
    if (scaled <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(scaled), buckets - 1);
}

ConsistencyCurve consistency_accuracy_curve(const Dataset& dataset, std::span<const Label> predictions,
                                            std::size_t buckets) {
    if (buckets < 1) throw std::invalid_argument("consistency_accuracy_curve: need at least one bucket");
    if (predictions.size() != dataset.num_nodes()) {
        throw std::invalid_argument("consistency_accuracy_curve: prediction count differs from node count");
    }
    const auto consistency = node_label_consistency(dataset.graph, dataset.labels);
    ConsistencyCurve c;
    c.edges.resize(buckets + 1);
    for (std::size_t b = 0; b <= buckets; ++b) {
        c.edges[b] = static_cast<double>(b) / static_cast<double>(buckets);
    }
    c.counts.assign(buckets, 0);
    c.correct.assign(buckets, 0);
    for (std::size_t i : dataset.split.test) {
        if (!consistency[i]) continue;
        const std::size_t b = consistency_bucket(*consistency[i], buckets);
        ++c.counts[b];
        if (predictions[i] == dataset.labels[i]) ++c.correct[b];
    }
    c.accuracy.resize(buckets);
    for (std::size_t b = 0; b < buckets; ++b) {
        if (c.counts[b] > 0) {
            c.accuracy[b] = static_cast<double>(c.correct[b]) / static_cast<double>(c.counts[b]);
        }
    }
    return c;
}

double spearman_rank_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
    if (x.size() < 2) return 0.0;
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double curve_trend(const ConsistencyCurve& curve) {
    std::vector<double> mids, accs;
    for (std::size_t b = 0; b < curve.buckets(); ++b) {
        if (!curve.accuracy[b]) continue;
        mids.push_back(curve.midpoint(b));
        accs.push_back(*curve.accuracy[b]);
    }
    return spearman_rank_correlation(mids, accs);
}

const VariantSummary& ExperimentTable::row(Variant v) const {
    for (const auto& r : rows) {
        if (r.variant == v) return r;
    }
    throw std::out_of_range("experiment table has no row for variant " + std::string(to_string(v)));
}

void run_parallel(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& task) {
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(jobs, 1));
    if (threads == 1) {
        for (std::size_t j = 0; j < jobs; ++j) task(j);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        workers.emplace_back([&] {
            for (std::size_t j = next++; j < jobs; j = next++) {
                try {
                    task(j);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
}

std::size_t worker_threads() {
    if (const char* env = std::getenv("LC_GNN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

ExperimentTable assemble(std::string title, const Dataset& dataset, std::string column,
                         std::span<const Variant> variants, std::span<const std::uint64_t> seeds,
                         const std::vector<std::vector<RunRecord>>& per_seed) {
    ExperimentTable table;
    table.title = std::move(title);
    table.dataset = dataset.name;
    table.column = std::move(column);
    for (std::size_t v = 0; v < variants.size(); ++v) {
        std::vector<double> accs;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            table.runs.push_back(per_seed[s][v]);
            accs.push_back(per_seed[s][v].test_acc);
        }
        table.rows.push_back({variants[v], aggregate_seeds(accs)});
    }
    return table;
}

RunRecord record(Variant v, std::uint64_t seed, const RunResult& r) {
    return RunRecord{v, seed, r.test_acc, r.best_val_acc, r.best_epoch};
}

std::vector<RunRecord> run_variants(const Dataset& dataset, const TrainConfig& base, std::uint64_t seed,
                                    std::span<const Variant> variants) {
    TrainConfig config = base;
    config.seed = seed;
    std::optional<GcnParams> pretrained;
    std::vector<RunRecord> out;
    for (Variant v : variants) {
        config.variant = v;
        GcnParams init;
        if (v == Variant::base_only) {
            init = init_gcn_params(dataset.num_features(), config.hidden, dataset.num_classes, seed);
        } else {
            if (!pretrained) pretrained = pretrain_base(dataset, config);
            init = *pretrained;
        }
        out.push_back(record(v, seed, train_lc(dataset, config, init)));
    }
    return out;
}

}  // namespace

ExperimentTable run_ablation(const Dataset& dataset, const TrainConfig& base,
                             std::span<const std::uint64_t> seeds, std::size_t threads) {
    if (seeds.size() < 2) throw std::invalid_argument("run_ablation: need at least two seeds");
    static constexpr Variant kVariants[] = {Variant::base_only, Variant::no_lc_no_rl, Variant::no_rl,
                                            Variant::full};
    std::vector<std::vector<RunRecord>> per_seed(seeds.size());
    run_parallel(seeds.size(), threads,
                 [&](std::size_t s) { per_seed[s] = run_variants(dataset, base, seeds[s], kVariants); });
    return assemble("Node classification, fixed partition", dataset, dataset.name, kVariants, seeds,
                    per_seed);
}

ExperimentTable run_sparse_experiment(const Dataset& dataset, std::size_t labels_per_class,
                                      const TrainConfig& base, std::span<const std::uint64_t> seeds,
                                      std::span<const Variant> variants, std::size_t threads,
                                      std::size_t val_size, std::size_t test_size) {
    if (seeds.empty()) throw std::invalid_argument("run_sparse_experiment: no seeds");
    if (variants.empty()) throw std::invalid_argument("run_sparse_experiment: no variants");
    std::vector<std::vector<RunRecord>> per_seed(seeds.size());
    run_parallel(seeds.size(), threads, [&](std::size_t s) {
        Dataset sparse = dataset;
        sparse.split = make_sparse_split(dataset, labels_per_class, seeds[s], val_size, test_size);
        per_seed[s] = run_variants(sparse, base, seeds[s], variants);
    });
    return assemble("Sparse scenario on " + dataset.name, dataset,
                    std::to_string(labels_per_class) + " labels", variants, seeds, per_seed);
}

std::string display_name(Variant v) {
    switch (v) {
        case Variant::base_only: return "GCN*";
        case Variant::no_lc_no_rl: return "LC-GCN (w/o LC, w/o RL)";
        case Variant::no_rl: return "LC-GCN (w/o RL)";
        case Variant::full: return "LC-GCN";
    }
    return "?";
}

std::string format_table(const ExperimentTable& table) {
    std::size_t width = 6;
    for (const auto& r : table.rows) width = std::max(width, display_name(r.variant).size());
    std::ostringstream out;
    out << table.title << " (" << table.runs.size() / std::max<std::size_t>(table.rows.size(), 1)
        << " seeds)\n";
    const std::string rule(width + 20, '-');
    out << rule << '\n';
    out << "Method" << std::string(width - 6 + 2, ' ') << table.column << '\n';
    out << rule << '\n';
    for (const auto& r : table.rows) {
        const std::string name = display_name(r.variant);
        out << name << std::string(width - name.size() + 2, ' ') << percent(r.test.mean) << "±"
            << percent(r.test.stddev) << "%\n";
    }
    out << rule << '\n';
    return out.str();
}

std::string curve_tsv(const ConsistencyCurve& curve) {
    std::ostringstream out;
    out << "consistency_lo\tconsistency_hi\tcount\taccuracy\n";
    for (std::size_t b = 0; b < curve.buckets(); ++b) {
        out << curve.edges[b] << '\t' << curve.edges[b + 1] << '\t' << curve.counts[b] << '\t';
        if (curve.accuracy[b]) out << *curve.accuracy[b];
        out << '\n';
    }
    return out.str();
}

}  // namespace lcgnn
