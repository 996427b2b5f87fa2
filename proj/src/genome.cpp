#include "sboost/genome.hpp"

#include "sboost/error.hpp"
#include "sboost/stats.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace sboost {

namespace {

// Blocks farther than this many phi from a SNP contribute below double precision.
constexpr double kWeightCutoff = 20.0;

std::vector<std::string> chromosome_order(std::span<const Gene> genes) {
    std::vector<std::string> order;
    std::unordered_set<std::string> seen;
    for (const auto& g : genes)
        if (seen.insert(g.chromosome).second) order.push_back(g.chromosome);
    return order;
}

BoostVector normalize(Eigen::VectorXd raw, double phi, bool per_region) {
    BoostVector out;
    out.phi = phi;
    out.per_region = per_region;
    out.raw_max = raw.size() ? raw.maxCoeff() : 0.0;
    if (out.raw_max > 0.0) {
        raw /= out.raw_max;
        // Guard against the argmax landing at 1 - ulp after division.
        Eigen::Index arg = 0;
        raw.maxCoeff(&arg);
        raw[arg] = 1.0;
    } else {
        out.all_zero = true;
        raw.setZero();
    }
    out.values = std::move(raw);
    return out;
}

} // namespace

BoostVector BoostVector::subset(std::span<const std::size_t> keep) const {
    BoostVector out = *this;
    out.values.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        if (keep[k] >= size()) throw DomainError("BoostVector::subset: index out of range");
        out.values[static_cast<Eigen::Index>(k)] = values[static_cast<Eigen::Index>(keep[k])];
    }
    return out;
}

std::vector<std::size_t> RegionPartition::owner(std::size_t snp_count) const {
    std::vector<std::size_t> out(snp_count, 0);
    for (std::size_t r = 0; r < regions.size(); ++r)
        for (std::size_t j = regions[r].begin; j < regions[r].end && j < snp_count; ++j) out[j] = r;
    return out;
}

double RegionPartition::mean_phi() const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : regions) {
        if (!r.fitted()) continue;
        sum += r.phi;
        ++count;
    }
    if (count == 0) throw ConfigError("mean_phi: no fitted regions");
    return sum / static_cast<double>(count);
}

void validate_snps(std::span<const SnpLocus> snps) {
    std::unordered_set<std::string> ids;
    std::unordered_map<std::string, BasePair> last;
    for (std::size_t j = 0; j < snps.size(); ++j) {
        const auto& s = snps[j];
        if (!ids.insert(s.id).second) throw ConfigError("duplicate SNP id '" + s.id + "'");
        if (s.position < 0) throw ConfigError("SNP '" + s.id + "' has a negative position");
        auto it = last.find(s.chromosome);
        if (it != last.end() && s.position <= it->second)
            throw ConfigError("SNP '" + s.id + "' is not in increasing position order on chromosome " +
                              s.chromosome);
        last[s.chromosome] = s.position;
    }
}

void validate_genes(std::span<const Gene> genes) {
    for (const auto& g : genes)
        if (g.start >= g.end)
            throw ConfigError("gene '" + g.id + "' has start >= end");
}

void validate_relevances(const RelevanceVector& relevances, std::size_t gene_count) {
    if (relevances.size() != gene_count)
        throw ConfigError("relevance vector has " + std::to_string(relevances.size()) +
                          " entries for " + std::to_string(gene_count) + " genes");
    for (double r : relevances)
        if (!std::isfinite(r) || r < 0.0) throw ConfigError("relevances must be finite and >= 0");
}

std::vector<GenomicBlock> build_blocks(std::span<const Gene> genes,
                                       const RelevanceVector& relevances) {
    validate_genes(genes);
    validate_relevances(relevances, genes.size());

    std::vector<GenomicBlock> blocks;
    for (const auto& chrom : chromosome_order(genes)) {
        // Sweep over endpoints; +relevance at a start, -relevance at an end.
        struct Event {
            BasePair pos;
            int delta;
            double relevance;
        };
        std::vector<Event> events;
        for (std::size_t g = 0; g < genes.size(); ++g) {
            if (genes[g].chromosome != chrom) continue;
            events.push_back({genes[g].start, +1, relevances[g]});
            events.push_back({genes[g].end, -1, relevances[g]});
        }
        std::sort(events.begin(), events.end(),
                  [](const Event& a, const Event& b) { return a.pos < b.pos; });

        int active = 0;
        long double sum = 0.0L;
        std::size_t e = 0;
        while (e < events.size()) {
            const BasePair here = events[e].pos;
            for (; e < events.size() && events[e].pos == here; ++e) {
                active += events[e].delta;
                sum += events[e].delta * static_cast<long double>(events[e].relevance);
            }
            if (active > 0 && e < events.size()) {
                const double mean = static_cast<double>(sum / active);
                blocks.push_back({chrom, here, events[e].pos, std::max(mean, 0.0)});
            }
            if (active == 0) sum = 0.0L;
        }
    }
    return blocks;
}

double gene_weight(double position, const GenomicBlock& block, double phi) {
    if (!(phi > 0.0)) throw DomainError("gene_weight: phi must be positive");
    const double a = (static_cast<double>(block.start) - position) / phi;
    const double b = (static_cast<double>(block.end) - position) / phi;
    return normal_interval_mass(a, b);
}

Eigen::VectorXd raw_boosts(std::span<const SnpLocus> snps, std::span<const GenomicBlock> blocks,
                           std::span<const double> phi_per_snp) {
    if (phi_per_snp.size() != snps.size())
        throw ConfigError("raw_boosts: one phi per SNP required");

    std::map<std::string, std::vector<const GenomicBlock*>> by_chrom;
    for (const auto& b : blocks) by_chrom[b.chromosome].push_back(&b);
    for (auto& [chrom, list] : by_chrom)
        std::sort(list.begin(), list.end(),
                  [](const GenomicBlock* x, const GenomicBlock* y) { return x->start < y->start; });

    Eigen::VectorXd raw = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(snps.size()));
    for (std::size_t j = 0; j < snps.size(); ++j) {
        const double phi = phi_per_snp[j];
        if (!(phi > 0.0)) throw DomainError("compute_boosts: phi must be positive");
        auto it = by_chrom.find(snps[j].chromosome);
        if (it == by_chrom.end()) continue;
        const auto& list = it->second;
        const double s = static_cast<double>(snps[j].position);
        const double reach = kWeightCutoff * phi;
        // Blocks are disjoint and sorted, so ends are sorted as well.
        auto first = std::lower_bound(list.begin(), list.end(), s - reach,
                                      [](const GenomicBlock* b, double v) {
                                          return static_cast<double>(b->end) < v;
                                      });
        double total = 0.0;
        for (auto b = first; b != list.end() && static_cast<double>((*b)->start) <= s + reach; ++b)
            total += gene_weight(s, **b, phi) * (*b)->relevance;
        raw[static_cast<Eigen::Index>(j)] = total;
    }
    return raw;
}

BoostVector compute_boosts(std::span<const SnpLocus> snps, std::span<const GenomicBlock> blocks,
                           double phi) {
    if (snps.empty()) throw ConfigError("compute_boosts: no SNPs");
    if (!(phi > 0.0)) throw DomainError("compute_boosts: phi must be positive");
    std::vector<double> phis(snps.size(), phi);
    return normalize(raw_boosts(snps, blocks, phis), phi, false);
}

BoostVector compute_boosts(std::span<const SnpLocus> snps, std::span<const GenomicBlock> blocks,
                           const RegionPartition& partition) {
    if (snps.empty()) throw ConfigError("compute_boosts: no SNPs");
    const auto owner = partition.owner(snps.size());
    std::vector<double> phis(snps.size());
    for (std::size_t j = 0; j < snps.size(); ++j) {
        const auto& region = partition.regions.at(owner[j]);
        if (!region.fitted()) throw ConfigError("compute_boosts: region without a fitted phi");
        phis[j] = region.phi;
    }
    return normalize(raw_boosts(snps, blocks, phis), partition.mean_phi(), true);
}

RegionPartition partition_regions(std::span<const SnpLocus> snps, std::span<const Gene> genes,
                                  BasePair gap) {
    RegionPartition out;
    if (snps.empty()) return out;

    std::vector<Region> raw;
    std::size_t begin = 0;
    for (std::size_t j = 1; j <= snps.size(); ++j) {
        const bool split = j == snps.size() || snps[j].chromosome != snps[j - 1].chromosome ||
                           snps[j].position - snps[j - 1].position >= gap;
        if (split) {
            raw.push_back({begin, j});
            begin = j;
        }
    }

    // A gene touching raw regions lo..hi fuses that whole run.
    std::vector<bool> join_previous(raw.size(), false);
    for (const auto& g : genes) {
        std::size_t lo = raw.size(), hi = 0;
        for (std::size_t r = 0; r < raw.size(); ++r) {
            const auto& first = snps[raw[r].begin];
            const auto& last = snps[raw[r].end - 1];
            if (first.chromosome != g.chromosome) continue;
            if (g.start <= last.position && g.end >= first.position) {
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        }
        for (std::size_t r = lo + 1; r <= hi && r < raw.size(); ++r) join_previous[r] = true;
    }

    for (std::size_t r = 0; r < raw.size(); ++r) {
        if (join_previous[r])
            out.regions.back().end = raw[r].end;
        else
            out.regions.push_back(raw[r]);
    }
    return out;
}

double correlation_magnitude(double distance, double phi) {
    if (!(phi > 0.0)) throw DomainError("correlation_magnitude: phi must be positive");
    return 2.0 * normal_cdf(-std::abs(distance) / phi);
}

double fit_phi_from_correlations(const Eigen::MatrixXd& abs_corr, std::span<const double> positions,
                                 const PhiFitOptions& options) {
    const auto k = static_cast<std::size_t>(abs_corr.rows());
    if (abs_corr.cols() != abs_corr.rows() || positions.size() != k)
        throw ConfigError("fit_phi: correlation matrix and positions disagree");
    if (options.grid_points < 2 || !(options.grid_min > 0.0) || options.grid_max <= options.grid_min)
        throw ConfigError("fit_phi: invalid phi grid");
    if (k < 2) return options.default_phi;

    std::vector<double> distance, observed;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            distance.push_back(std::abs(positions[i] - positions[j]));
            observed.push_back(std::abs(abs_corr(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j))));
        }

    auto mse = [&](double phi) {
        double acc = 0.0;
        for (std::size_t q = 0; q < distance.size(); ++q) {
            const double r = 2.0 * normal_cdf(-distance[q] / phi) - observed[q];
            acc += r * r;
        }
        return acc / static_cast<double>(distance.size());
    };

    const double lo = std::log(options.grid_min), hi = std::log(options.grid_max);
    std::vector<double> grid(static_cast<std::size_t>(options.grid_points));
    for (std::size_t g = 0; g < grid.size(); ++g)
        grid[g] = std::exp(lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid.size() - 1));

    std::size_t best = 0;
    double best_mse = mse(grid[0]);
    for (std::size_t g = 1; g < grid.size(); ++g) {
        const double m = mse(grid[g]);
        if (m < best_mse) { // strict: smallest phi wins ties
            best_mse = m;
            best = g;
        }
    }
    if (!options.refine) return grid[best];

    // Golden-section search in log(phi) between the neighbouring grid points.
    double a = std::log(grid[best > 0 ? best - 1 : 0]);
    double b = std::log(grid[std::min(best + 1, grid.size() - 1)]);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - ratio * (b - a), d = a + ratio * (b - a);
    double fc = mse(std::exp(c)), fd = mse(std::exp(d));
    for (int it = 0; it < 80 && b - a > 1e-10; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = mse(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = mse(std::exp(d));
        }
    }
    const double refined = std::exp(0.5 * (a + b));
    return mse(refined) < best_mse ? refined : grid[best];
}

double fit_phi(const Eigen::MatrixXd& columns, std::span<const double> positions,
               const PhiFitOptions& options) {
    if (static_cast<std::size_t>(columns.cols()) != positions.size())
        throw ConfigError("fit_phi: one position per column required");

    std::vector<Eigen::Index> usable;
    std::vector<double> usable_pos;
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
        const auto col = columns.col(c);
        if ((col.array() != col[0]).any()) {
            usable.push_back(c);
            usable_pos.push_back(positions[static_cast<std::size_t>(c)]);
        }
    }
    if (usable.size() < 2) return options.default_phi;

    const auto k = static_cast<Eigen::Index>(usable.size());
    Eigen::MatrixXd centered(columns.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const auto col = columns.col(usable[static_cast<std::size_t>(c)]);
        centered.col(c) = col.array() - col.mean();
        centered.col(c).normalize();
    }
    const Eigen::MatrixXd corr = (centered.transpose() * centered).cwiseAbs();
    return fit_phi_from_correlations(corr, usable_pos, options);
}

void fit_regions(RegionPartition& partition, const Eigen::MatrixXd& markers,
                 std::span<const SnpLocus> snps, const PhiFitOptions& options) {
    if (static_cast<std::size_t>(markers.cols()) != snps.size())
        throw ConfigError("fit_regions: marker matrix and SNP list disagree");
    for (auto& region : partition.regions) {
        std::vector<double> pos;
        for (std::size_t j = region.begin; j < region.end; ++j)
            pos.push_back(static_cast<double>(snps[j].position));
        region.phi = fit_phi(markers.middleCols(static_cast<Eigen::Index>(region.begin),
                                                static_cast<Eigen::Index>(region.size())),
                             pos, options);
    }
}

} // namespace sboost
