#include "lrlab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lrlab/errors.hpp"
#include "lrlab/io.hpp"

namespace lrlab {

namespace {

constexpr std::string_view kModule = "datagen";

[[noreturn]] void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, kModule, what);
}

constexpr std::string_view kDatasetMagic = "LRDS";
constexpr std::uint32_t kDatasetVersion = 1;

}  // namespace

void DataConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            fail(ErrorKind::invalid_argument, what);
        }
    };
    require(d >= 1, "d must be positive");
    require(L >= 1, "L must be positive");
    require(M >= 2, "M >= 2 required");
    require(M <= d, "M <= d required (got M=" + std::to_string(M) + ", d=" + std::to_string(d) + ")");
    require(n_relevant > n_confusion, "n_relevant > n_confusion required");
    require(n_relevant + n_confusion <= L, "n_relevant + n_confusion <= L required");
    require(n_relevant + n_confusion == L || M >= 3, "irrelevant tokens need M >= 3");
    require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be finite and >= 0");
    // beyond sqrt(2)/2 the nearest pattern of a token is no longer its source
    require(std::isfinite(tau) && tau >= 0.0 && tau < 0.7, "tau must lie in [0, 0.7)");
}

std::size_t Example::count(TokenRole role) const {
    return static_cast<std::size_t>(
        std::count_if(provenance.begin(), provenance.end(), [role](const TokenTag& t) { return t.role == role; }));
}

std::size_t Dataset::positives() const {
    return static_cast<std::size_t>(
        std::count_if(examples.begin(), examples.end(), [](const Example& e) { return e.y > 0; }));
}

PatternSet gen_patterns(const DataConfig& config) {
    config.validate();
    return PatternSet{random_orthonormal(config.M, config.d, derive_seed(config.seed, 0))};
}

ExampleSampler::ExampleSampler(const PatternSet& patterns, const DataConfig& config, std::uint64_t seed)
    : patterns_(patterns), config_(config), rng_(seed) {
    config_.validate();
    if (patterns_.count() != config_.M || patterns_.dim() != config_.d) {
        fail(ErrorKind::shape, "pattern set does not match the data config");
    }
}

Vector ExampleSampler::sample_token(std::size_t pattern_index) {
    if (pattern_index >= patterns_.count()) {
        fail(ErrorKind::invalid_argument, "pattern index " + std::to_string(pattern_index) + " out of range");
    }
    const auto mu = patterns_[pattern_index];
    Vector token(mu.begin(), mu.end());
    const std::size_t d = token.size();
    if (config_.noise_mode == NoiseMode::gaussian) {
        if (config_.sigma > 0.0) {
            for (double& x : token) {
                x += config_.sigma * rng_.normal();
            }
        }
        return token;
    }

    // Uniform draw from a ball, shrunk so the chord to mu stays within tau after
    // projecting back onto the unit sphere: |eps| <= r gives chord <= 2 sin(asin(r)/2).
    if (config_.tau > 0.0) {
        const double radius = config_.tau * std::sqrt(1.0 - 0.25 * config_.tau * config_.tau);
        Vector dir(d);
        double nrm = 0.0;
        do {
            for (double& x : dir) {
                x = rng_.normal();
            }
            nrm = norm2(dir);
        } while (nrm == 0.0);
        const double r = radius * std::pow(rng_.uniform(), 1.0 / static_cast<double>(d));
        for (std::size_t i = 0; i < d; ++i) {
            token[i] += r * dir[i] / nrm;
        }
    }
    const double len = norm2(token);
    for (double& x : token) {
        x /= len;
    }
    return token;
}

Example ExampleSampler::sample_example(int label) {
    if (label != 1 && label != -1) {
        fail(ErrorKind::invalid_argument, "label must be +1 or -1");
    }
    const std::size_t L = config_.L;
    const std::uint32_t relevant = label > 0 ? 0 : 1;
    const std::uint32_t other = 1 - relevant;

    std::vector<TokenTag> tags;
    tags.reserve(L);
    for (std::size_t i = 0; i < config_.n_relevant; ++i) {
        tags.push_back({relevant, TokenRole::label_relevant});
    }
    for (std::size_t i = 0; i < config_.n_confusion; ++i) {
        tags.push_back({other, TokenRole::confusion});
    }
    const std::size_t n_irrelevant_patterns = config_.M - 2;
    while (tags.size() < L) {
        const auto j = static_cast<std::uint32_t>(2 + irrelevant_cursor_ % n_irrelevant_patterns);
        ++irrelevant_cursor_;
        tags.push_back({j, TokenRole::irrelevant});
    }
    rng_.shuffle(std::span<TokenTag>(tags));

    Example ex{Matrix(config_.d, L), label, tags, {}};
    for (std::size_t l = 0; l < L; ++l) {
        ex.x.set_col(l, sample_token(tags[l].pattern));
        ex.s_set.push_back(l);
    }
    return ex;
}

std::size_t nearest_pattern(std::span<const double> token, const PatternSet& patterns) {
    std::size_t best = 0;
    double best_dist = INFINITY;
    for (std::size_t j = 0; j < patterns.count(); ++j) {
        double dist = 0.0;
        const auto mu = patterns[j];
        for (std::size_t i = 0; i < token.size(); ++i) {
            const double diff = token[i] - mu[i];
            dist += diff * diff;
        }
        if (dist < best_dist) {
            best_dist = dist;
            best = j;
        }
    }
    return best;
}

int label_of(const Matrix& x, const PatternSet& patterns) {
    if (x.rows() != patterns.dim()) {
        fail(ErrorKind::shape, "token dimension does not match patterns");
    }
    std::size_t first = 0;
    std::size_t second = 0;
    for (std::size_t l = 0; l < x.cols(); ++l) {
        const std::size_t j = nearest_pattern(x.col(l), patterns);
        first += (j == 0);
        second += (j == 1);
    }
    if (first == second) {
        fail(ErrorKind::degenerate, "tie between discriminative pattern counts");
    }
    return first > second ? 1 : -1;
}

Dataset gen_dataset(std::size_t n, const PatternSet& patterns, const DataConfig& config, std::uint64_t seed) {
    if (n == 0) {
        fail(ErrorKind::invalid_argument, "dataset size must be positive");
    }
    ExampleSampler sampler(patterns, config, seed);
    Dataset ds{{}, config, patterns};
    ds.examples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ds.examples.push_back(sampler.sample_example(i % 2 == 0 ? 1 : -1));
    }
    return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    const DataConfig& c = dataset.config;
    io::ByteWriter w;
    w.put_bytes(kDatasetMagic);
    w.put_u32(kDatasetVersion);
    w.put_u64(c.d);
    w.put_u64(c.L);
    w.put_u64(c.M);
    w.put_u64(dataset.size());
    w.put_u8(static_cast<std::uint8_t>(c.noise_mode));
    w.put_u64(c.seed);
    w.put_f64(c.sigma);
    w.put_f64(c.tau);
    w.put_u64(c.n_relevant);
    w.put_u64(c.n_confusion);
    w.put_f64s(dataset.patterns.patterns.data());
    for (const Example& ex : dataset.examples) {
        w.put_f64s(ex.x.data());
    }
    for (const Example& ex : dataset.examples) {
        w.put_u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(ex.y)));
    }
    for (const Example& ex : dataset.examples) {
        for (const TokenTag& t : ex.provenance) {
            w.put_u32(t.pattern);
            w.put_u8(static_cast<std::uint8_t>(t.role));
        }
    }
    io::write_atomic(path, w.str());
}

Dataset load_dataset(const std::filesystem::path& path) {
    const std::string raw = io::read_file(path);
    io::ByteReader r(raw);
    if (r.get_bytes(4) != kDatasetMagic || r.get_u32() != kDatasetVersion) {
        fail(ErrorKind::invalid_input, path.string() + " is not a dataset snapshot");
    }
    DataConfig c;
    c.d = r.get_u64();
    c.L = r.get_u64();
    c.M = r.get_u64();
    const std::size_t n = r.get_u64();
    const std::uint8_t mode = r.get_u8();
    if (mode > 1) {
        fail(ErrorKind::invalid_input, "unknown noise mode in dataset snapshot");
    }
    c.noise_mode = static_cast<NoiseMode>(mode);
    c.seed = r.get_u64();
    c.sigma = r.get_f64();
    c.tau = r.get_f64();
    c.n_relevant = r.get_u64();
    c.n_confusion = r.get_u64();
    c.validate();

    PatternSet patterns{Matrix(c.M, c.d)};
    r.get_f64s(patterns.patterns.data());
    Dataset ds{{}, c, patterns};
    ds.examples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Example ex{Matrix(c.d, c.L), 1, std::vector<TokenTag>(c.L), {}};
        r.get_f64s(ex.x.data());
        for (std::size_t l = 0; l < c.L; ++l) {
            ex.s_set.push_back(l);
        }
        ds.examples.push_back(std::move(ex));
    }
    for (Example& ex : ds.examples) {
        ex.y = static_cast<std::int8_t>(r.get_u8());
        if (ex.y != 1 && ex.y != -1) {
            fail(ErrorKind::invalid_input, "label outside {-1, +1} in dataset snapshot");
        }
    }
    for (Example& ex : ds.examples) {
        for (TokenTag& t : ex.provenance) {
            t.pattern = r.get_u32();
            const std::uint8_t role = r.get_u8();
            if (t.pattern >= c.M || role > 2) {
                fail(ErrorKind::invalid_input, "corrupt provenance in dataset snapshot");
            }
            t.role = static_cast<TokenRole>(role);
        }
    }
    if (!r.at_end()) {
        fail(ErrorKind::invalid_input, "trailing bytes in dataset snapshot");
    }
    return ds;
}

}  // namespace lrlab
