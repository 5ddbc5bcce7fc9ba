#include "lrlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "lrlab/errors.hpp"
#include "lrlab/io.hpp"
#include "lrlab/rng.hpp"

namespace lrlab {

namespace {

constexpr std::string_view kModule = "config";

enum SeedStream : std::uint64_t {
    kPatternStream = 1,
    kDatasetStream = 2,
    kTestsetStream = 3,
    kInitStream = 4,
    kBatchStream = 5,
    kGradcheckStream = 6,
};

[[noreturn]] void invalid(std::string_view key, const std::string& what) {
    throw Error(ErrorKind::validation, kModule, std::string(key) + ": " + what);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    if (trim(s).empty()) {
        return out;
    }
    std::size_t start = 0;
    for (;;) {
        const auto comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.size() - start : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
        invalid(key, "expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return static_cast<T>(out);
}

double parse_real(std::string_view key, std::string_view v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
        invalid(key, "expected a finite real number, got '" + std::string(v) + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") {
        return true;
    }
    if (v == "false" || v == "0") {
        return false;
    }
    invalid(key, "expected true or false, got '" + std::string(v) + "'");
}

std::string fmt(double v) { return io::format_double(v); }

template <typename T>
std::string fmt_list(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        if constexpr (std::is_floating_point_v<T>) {
            out += fmt(xs[i]);
        } else {
            out += std::to_string(xs[i]);
        }
    }
    return out;
}

struct Field {
    std::string_view key;
    std::function<void(ExperimentConfig&, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define LRLAB_SIZE_FIELD(name, member)                                                                 \
    Field {                                                                                             \
        name, [](ExperimentConfig& c, std::string_view v) { c.member = parse_unsigned<std::size_t>(name, v); }, \
            [](const ExperimentConfig& c) { return std::to_string(c.member); }                         \
    }
#define LRLAB_REAL_FIELD(name, member)                                                        \
    Field {                                                                                    \
        name, [](ExperimentConfig& c, std::string_view v) { c.member = parse_real(name, v); }, \
            [](const ExperimentConfig& c) { return fmt(c.member); }                           \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        Field{"seed", [](ExperimentConfig& c, std::string_view v) { c.seed = parse_unsigned<std::uint64_t>("seed", v); },
              [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
        LRLAB_SIZE_FIELD("data.d", data.d),
        LRLAB_SIZE_FIELD("data.L", data.L),
        LRLAB_SIZE_FIELD("data.M", data.M),
        LRLAB_REAL_FIELD("data.sigma", data.sigma),
        LRLAB_REAL_FIELD("data.tau", data.tau),
        Field{"data.noise_mode",
              [](ExperimentConfig& c, std::string_view v) {
                  if (v == "gaussian") {
                      c.data.noise_mode = NoiseMode::gaussian;
                  } else if (v == "bounded") {
                      c.data.noise_mode = NoiseMode::bounded;
                  } else {
                      invalid("data.noise_mode", "expected gaussian or bounded, got '" + std::string(v) + "'");
                  }
              },
              [](const ExperimentConfig& c) {
                  return std::string(c.data.noise_mode == NoiseMode::gaussian ? "gaussian" : "bounded");
              }},
        LRLAB_SIZE_FIELD("data.n_relevant", data.n_relevant),
        LRLAB_SIZE_FIELD("data.n_confusion", data.n_confusion),
        LRLAB_SIZE_FIELD("model.m", model.m),
        LRLAB_SIZE_FIELD("model.m_a", model.m_a),
        LRLAB_SIZE_FIELD("model.m_b", model.m_b),
        LRLAB_REAL_FIELD("model.delta", model.delta),
        LRLAB_REAL_FIELD("model.xi", model.xi),
        Field{"model.tied_a",
              [](ExperimentConfig& c, std::string_view v) { c.model.tied_a = parse_bool("model.tied_a", v); },
              [](const ExperimentConfig& c) { return std::string(c.model.tied_a ? "true" : "false"); }},
        LRLAB_REAL_FIELD("train.eta", train.eta),
        LRLAB_SIZE_FIELD("train.batch_size", train.batch_size),
        LRLAB_SIZE_FIELD("train.iters", train.iters),
        Field{"train.snapshot_at",
              [](ExperimentConfig& c, std::string_view v) {
                  c.train.snapshot_at.clear();
                  for (auto item : split_list(v)) {
                      c.train.snapshot_at.push_back(parse_unsigned<std::size_t>("train.snapshot_at", item));
                  }
              },
              [](const ExperimentConfig& c) { return fmt_list(c.train.snapshot_at); }},
        LRLAB_SIZE_FIELD("train.eval_every", train.eval_every),
        LRLAB_SIZE_FIELD("train.train_size", train.train_size),
        LRLAB_SIZE_FIELD("train.test_size", train.test_size),
        LRLAB_REAL_FIELD("train.c_t", c_t),
        LRLAB_REAL_FIELD("analysis.dominance_factor", thresholds.dominance_factor),
        LRLAB_REAL_FIELD("analysis.energy_min", thresholds.energy_min),
        LRLAB_REAL_FIELD("analysis.spectral_ratio_max", thresholds.spectral_ratio_max),
        LRLAB_REAL_FIELD("analysis.small_min", thresholds.small_min),
        LRLAB_REAL_FIELD("analysis.small_max", thresholds.small_max),
        LRLAB_REAL_FIELD("analysis.align_min", thresholds.align_min),
        Field{"analysis.ranks",
              [](ExperimentConfig& c, std::string_view v) {
                  c.ranks.clear();
                  for (auto item : split_list(v)) {
                      c.ranks.push_back(parse_unsigned<std::size_t>("analysis.ranks", item));
                  }
              },
              [](const ExperimentConfig& c) { return fmt_list(c.ranks); }},
        Field{"prune.rates",
              [](ExperimentConfig& c, std::string_view v) {
                  c.prune_rates.clear();
                  for (auto item : split_list(v)) {
                      c.prune_rates.push_back(parse_real("prune.rates", item));
                  }
              },
              [](const ExperimentConfig& c) { return fmt_list(c.prune_rates); }},
        LRLAB_SIZE_FIELD("gradcheck.trials", gradcheck_trials),
        LRLAB_REAL_FIELD("gradcheck.eps", gradcheck_eps),
        Field{"output_dir", [](ExperimentConfig& c, std::string_view v) { c.output_dir = std::string(v); },
              [](const ExperimentConfig& c) { return c.output_dir.string(); }},
    };
    return table;
}

#undef LRLAB_SIZE_FIELD
#undef LRLAB_REAL_FIELD

}  // namespace

void ExperimentConfig::apply_seed(std::uint64_t new_seed) {
    seed = new_seed;
    data.seed = derive_seed(seed, kPatternStream);
    model.seed = derive_seed(seed, kInitStream);
    train.seed = derive_seed(seed, kBatchStream);
}

std::uint64_t ExperimentConfig::dataset_seed() const { return derive_seed(seed, kDatasetStream); }
std::uint64_t ExperimentConfig::testset_seed() const { return derive_seed(seed, kTestsetStream); }
std::uint64_t ExperimentConfig::gradcheck_seed() const { return derive_seed(seed, kGradcheckStream); }

void ExperimentConfig::validate() const {
    auto wrap = [](std::string_view key, auto&& check) {
        try {
            check();
        } catch (const Error& e) {
            invalid(key, e.what());
        }
    };
    if (data.M > data.d) {
        invalid("data.M", "M ≤ d required (M=" + std::to_string(data.M) + ", d=" + std::to_string(data.d) + ")");
    }
    wrap("data", [&] { data.validate(); });
    wrap("model", [&] { model.validate(); });
    if (train.train_size == 0) {
        invalid("train.train_size", "must be positive");
    }
    if (train.test_size == 0) {
        invalid("train.test_size", "must be positive");
    }
    if (train.batch_size == 0 || train.batch_size > train.train_size) {
        invalid("train.batch_size", "batch_size ≤ N required (batch_size=" + std::to_string(train.batch_size) +
                                        ", N=" + std::to_string(train.train_size) + ")");
    }
    for (std::size_t s : train.snapshot_at) {
        if (s > train.iters) {
            invalid("train.snapshot_at", "snapshot iteration " + std::to_string(s) + " exceeds train.iters");
        }
    }
    wrap("train", [&] { train.validate(train.train_size); });
    if (!(c_t > 0.0)) {
        invalid("train.c_t", "must be positive");
    }
    if (thresholds.small_min > thresholds.small_max) {
        invalid("analysis.small_min", "must not exceed analysis.small_max");
    }
    for (std::size_t r : ranks) {
        if (r == 0) {
            invalid("analysis.ranks", "ranks must be >= 1");
        }
    }
    for (double r : prune_rates) {
        if (r < 0.0 || r > 1.0) {
            invalid("prune.rates", "rates must lie in [0, 1]");
        }
    }
    if (!std::is_sorted(prune_rates.begin(), prune_rates.end())) {
        invalid("prune.rates", "rates must be ascending");
    }
    if (gradcheck_trials == 0) {
        invalid("gradcheck.trials", "must be >= 1");
    }
    if (!(gradcheck_eps > 0.0)) {
        invalid("gradcheck.eps", "must be positive");
    }
}

ExperimentConfig parse_config(std::string_view text) {
    std::map<std::string_view, const Field*> by_key;
    for (const Field& f : fields()) {
        by_key.emplace(f.key, &f);
    }

    ExperimentConfig cfg;
    std::vector<std::pair<const Field*, std::string>> assignments;
    std::set<std::string_view> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            invalid("line " + std::to_string(line_no), "expected 'key = value'");
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = by_key.find(key);
        if (it == by_key.end()) {
            invalid(key, "unknown key");
        }
        if (!seen.insert(it->first).second) {
            invalid(key, "key given more than once");
        }
        assignments.emplace_back(it->second, std::string(value));
    }

    // seed first, so explicit values are not clobbered by derived ones
    if (seen.count("seed")) {
        for (const auto& [field, value] : assignments) {
            if (field->key == "seed") {
                field->set(cfg, value);
            }
        }
    }
    cfg.apply_seed(cfg.seed);
    for (const auto& [field, value] : assignments) {
        if (field->key != "seed") {
            field->set(cfg, value);
        }
    }
    if (!seen.count("train.snapshot_at")) {
        cfg.train.snapshot_at = {0, 1, 10, 20, 30, cfg.train.iters};
        std::erase_if(cfg.train.snapshot_at, [&](std::size_t s) { return s > cfg.train.iters; });
        std::sort(cfg.train.snapshot_at.begin(), cfg.train.snapshot_at.end());
        cfg.train.snapshot_at.erase(std::unique(cfg.train.snapshot_at.begin(), cfg.train.snapshot_at.end()),
                                    cfg.train.snapshot_at.end());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorKind::not_found, kModule, "config file " + path.string() + " does not exist");
    }
    return parse_config(io::read_file(path));
}

std::string render_config(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "# resolved experiment configuration\n";
    for (const Field& f : fields()) {
        if (f.key == "output_dir") {
            continue;
        }
        out << f.key << " = " << f.get(config) << '\n';
    }
    return out.str();
}

}  // namespace lrlab
