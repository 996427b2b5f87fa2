#include "sboost/io.hpp"

#include "sboost/error.hpp"
#include "sboost/tsv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace sboost {

std::string format_real(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t tab = line.find('\t', start);
        out.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return out;
}

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.emplace_back(line.substr(start, i - start));
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const std::size_t b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string checksum_hex(std::string_view contents) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : contents) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

namespace {

template <class T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (s.empty()) return false;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(std::move(line));
    }
    return out;
}

SnpLocus parse_snp_header(const std::string& token, const std::string& source, std::size_t line) {
    const auto last = token.rfind(':');
    if (last == std::string::npos || last == 0) throw ParseError(source, line, "SNP header '" + token + "' is not id:chrom:pos");
    const auto mid = token.rfind(':', last - 1);
    if (mid == std::string::npos || mid == 0) throw ParseError(source, line, "SNP header '" + token + "' is not id:chrom:pos");
    SnpLocus s;
    s.id = token.substr(0, mid);
    s.chromosome = token.substr(mid + 1, last - mid - 1);
    if (!parse_number(std::string_view(token).substr(last + 1), s.position) || s.chromosome.empty())
        throw ParseError(source, line, "SNP header '" + token + "' has an invalid position");
    return s;
}

} // namespace

GenotypeTable parse_genotypes(const std::string& text, const std::string& source) {
    const auto lines = lines_of(text);
    std::size_t ln = 0;
    while (ln < lines.size() && trim(lines[ln]).empty()) ++ln;
    if (ln == lines.size()) throw ParseError(source, 1, "empty genotype file");
    const auto header = split_tabs(trim(lines[ln]));
    if (header.empty() || header[0] != "#pheno") throw ParseError(source, ln + 1, "header must start with #pheno");
    std::vector<SnpLocus> snps;
    for (std::size_t k = 1; k < header.size(); ++k) snps.push_back(parse_snp_header(header[k], source, ln + 1));
    try {
        validate_snps(snps);
    } catch (const Error& e) {
        throw ParseError(source, ln + 1, e.what());
    }
    const std::size_t p = snps.size();

    std::vector<double> y;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::size_t, std::size_t>> missing;
    for (++ln; ln < lines.size(); ++ln) {
        const auto body = trim(lines[ln]);
        if (body.empty()) continue;
        const auto fields = split_tabs(body);
        if (fields.size() != p + 1)
            throw ParseError(source, ln + 1, "expected " + std::to_string(p + 1) + " fields, found " +
                                                 std::to_string(fields.size()));
        int pheno = -1;
        if (!parse_number(fields[0], pheno) || (pheno != 0 && pheno != 1))
            throw ParseError(source, ln + 1, "phenotype '" + fields[0] + "' is not 0 or 1");
        y.push_back(pheno);
        std::vector<double> row(p);
        for (std::size_t j = 0; j < p; ++j) {
            const auto f = trim(fields[j + 1]);
            if (f == ".") {
                missing.emplace_back(rows.size(), j);
                row[j] = 0.0;
                continue;
            }
            int g = -1;
            if (!parse_number(f, g) || g < 0 || g > 2)
                throw ParseError(source, ln + 1, "genotype '" + std::string(f) + "' for " + snps[j].id +
                                                     " is not 0, 1, 2 or .");
            row[j] = g;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(source, lines.size(), "no individuals");

    Eigen::MatrixXd markers(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < p; ++j) markers(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

    if (!missing.empty()) {
        std::vector<double> sum(p, 0.0), count(p, 0.0);
        std::set<std::pair<std::size_t, std::size_t>> hole(missing.begin(), missing.end());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < p; ++j)
                if (!hole.count({i, j})) {
                    sum[j] += rows[i][j];
                    count[j] += 1.0;
                }
        for (const auto& [i, j] : missing)
            markers(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                count[j] > 0.0 ? std::round(sum[j] / count[j]) : 0.0;
    }

    GenotypeTable out;
    out.data = make_dataset(Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())), markers,
                            std::move(snps));
    out.imputed = missing.size();
    return out;
}

GenotypeTable load_genotypes(const std::filesystem::path& path) { return parse_genotypes(read_file(path), path.string()); }

std::string format_genotypes(const Dataset& data) {
    std::ostringstream out;
    out << "#pheno";
    for (const auto& s : data.snps) out << '\t' << s.id << ':' << s.chromosome << ':' << s.position;
    out << '\n';
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        out << static_cast<int>(data.y[i]);
        for (Eigen::Index j = 1; j <= data.p(); ++j) out << '\t' << static_cast<int>(data.X(i, j));
        out << '\n';
    }
    return out.str();
}

std::vector<Gene> parse_genes(const std::string& text, const std::string& source) {
    std::vector<Gene> genes;
    const auto lines = lines_of(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const auto body = trim(lines[ln]);
        if (body.empty() || body.front() == '#') continue;
        const auto f = split_ws(body);
        if (f.size() < 4) throw ParseError(source, ln + 1, "expected chrom start end id");
        Gene g;
        g.chromosome = f[0];
        g.id = f[3];
        if (!parse_number(f[1], g.start) || !parse_number(f[2], g.end))
            throw ParseError(source, ln + 1, "gene coordinates must be integers");
        if (g.start >= g.end) throw ParseError(source, ln + 1, "gene " + g.id + " has start >= end");
        genes.push_back(std::move(g));
    }
    try {
        validate_genes(genes);
    } catch (const Error& e) {
        throw ParseError(source, 0, e.what());
    }
    return genes;
}

std::vector<Gene> load_genes(const std::filesystem::path& path) { return parse_genes(read_file(path), path.string()); }

std::string format_genes(std::span<const Gene> genes) {
    std::ostringstream out;
    for (const auto& g : genes) out << g.chromosome << '\t' << g.start << '\t' << g.end << '\t' << g.id << '\n';
    return out.str();
}

RelevanceVector parse_relevances(const std::string& text, std::span<const Gene> genes, const std::string& source) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < genes.size(); ++k) index.emplace(genes[k].id, k);
    RelevanceVector r(genes.size(), 1.0);
    std::unordered_set<std::string> seen;
    const auto lines = lines_of(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const auto body = trim(lines[ln]);
        if (body.empty() || body.front() == '#') continue;
        const auto f = split_ws(body);
        if (f.size() != 2) throw ParseError(source, ln + 1, "expected gene-id score");
        if (!seen.insert(f[0]).second) throw ParseError(source, ln + 1, "duplicate gene id " + f[0]);
        double score = 0.0;
        if (!parse_number(f[1], score) || !std::isfinite(score))
            throw ParseError(source, ln + 1, "score '" + f[1] + "' is not a number");
        if (score < 0.0) throw ParseError(source, ln + 1, "negative relevance for " + f[0]);
        if (auto it = index.find(f[0]); it != index.end()) r[it->second] = score;
    }
    return r;
}

RelevanceVector load_relevances(const std::filesystem::path& path, std::span<const Gene> genes) {
    return parse_relevances(read_file(path), genes, path.string());
}

} // namespace sboost
