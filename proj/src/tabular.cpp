#include "ape/tabular.hpp"

#include "ape/common.hpp"
#include "ape/geometry.hpp"
#include "ape/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ape {

namespace {

// RFC-4180 field splitting with quote support.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t row_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw ParseError("row " + std::to_string(row_no) + ": unterminated quote");
    fields.push_back(cur);
    return fields;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size()) return false;
    if (!std::isfinite(v)) return false;
    return (out = v, true);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string format_cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n") != std::string::npos;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace

void Dataset::recompute_stats() {
    const std::size_t d = specs.size();
    stats.assign(d, FeatureStats{});
    cat_freqs.assign(d, {});
    if (rows.empty()) return;
    const double n = static_cast<double>(rows.size());
    for (std::size_t j = 0; j < d; ++j) {
        if (specs[j].is_categorical()) {
            std::vector<double> freq(specs[j].categories.size(), 0.0);
            for (const auto& r : rows) {
                const auto idx = static_cast<std::size_t>(r[j]);
                if (idx >= freq.size())
                    throw InvalidArgument("categorical index out of range for feature " + specs[j].name);
                freq[idx] += 1.0;
            }
            for (auto& f : freq) f /= n;
            cat_freqs[j] = std::move(freq);
        } else {
            double sum = 0.0, lo = rows[0][j], hi = rows[0][j];
            for (const auto& r : rows) {
                sum += r[j];
                lo = std::min(lo, r[j]);
                hi = std::max(hi, r[j]);
            }
            const double mean = sum / n;
            double ss = 0.0;
            for (const auto& r : rows) ss += (r[j] - mean) * (r[j] - mean);
            stats[j].mean = mean;
            stats[j].stddev = std::sqrt(ss / n);
            stats[j].amplitude = hi - lo;
        }
    }
    if (labels) {
        int hi = -1;
        for (int c : *labels) hi = std::max(hi, c);
        n_classes = hi + 1;
    }
}

Dataset parse_csv(const std::string& content,
                  const std::optional<std::vector<FeatureSpec>>& schema,
                  const std::optional<std::string>& label_column) {
    std::vector<std::string> lines;
    {
        std::string line;
        std::istringstream in(content);
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(line);
        }
        while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    }
    if (lines.empty()) throw ParseError("empty CSV input");

    const auto header = split_csv_line(lines[0], 1);
    const std::size_t width = header.size();
    if (lines.size() < 2) throw ParseError("CSV has a header but no data rows");

    std::ptrdiff_t label_idx = -1;
    if (label_column) {
        for (std::size_t j = 0; j < width; ++j)
            if (header[j] == *label_column) label_idx = static_cast<std::ptrdiff_t>(j);
        if (label_idx < 0) throw ParseError("label column '" + *label_column + "' not found in header");
    }

    // Collect raw cells; validate rectangularity with 1-based row numbers.
    std::vector<std::vector<std::string>> cells;
    cells.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = split_csv_line(lines[i], i + 1);
        if (f.size() != width)
            throw ParseError("row " + std::to_string(i + 1) + ": expected " + std::to_string(width) +
                             " fields, got " + std::to_string(f.size()));
        cells.push_back(std::move(f));
    }

    Dataset ds;
    std::vector<std::size_t> feat_cols;
    for (std::size_t j = 0; j < width; ++j)
        if (static_cast<std::ptrdiff_t>(j) != label_idx) feat_cols.push_back(j);

    if (schema) {
        if (schema->size() != feat_cols.size())
            throw ParseError("schema has " + std::to_string(schema->size()) + " features, CSV has " +
                             std::to_string(feat_cols.size()));
        ds.specs = *schema;
    } else {
        for (std::size_t k = 0; k < feat_cols.size(); ++k) {
            const std::size_t j = feat_cols[k];
            FeatureSpec spec;
            spec.name = header[j];
            spec.kind = FeatureKind::Numerical;
            double tmp;
            for (const auto& row : cells) {
                if (trim(row[j]).empty())
                    throw ParseError("missing value in column '" + header[j] + "'");
                if (!parse_number(row[j], tmp)) {
                    spec.kind = FeatureKind::Categorical;
                    break;
                }
            }
            if (spec.kind == FeatureKind::Categorical) {
                std::set<std::string> seen;
                for (const auto& row : cells) {
                    if (seen.insert(row[j]).second) spec.categories.push_back(row[j]);
                }
            }
            ds.specs.push_back(std::move(spec));
        }
        // Uniqueness of feature names.
        std::set<std::string> names;
        for (const auto& s : ds.specs)
            if (!names.insert(s.name).second)
                throw ParseError("duplicate feature name '" + s.name + "'");
    }

    ds.rows.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        Instance inst(feat_cols.size());
        for (std::size_t k = 0; k < feat_cols.size(); ++k) {
            const std::string& cell = cells[i][feat_cols[k]];
            const FeatureSpec& spec = ds.specs[k];
            if (trim(cell).empty())
                throw ParseError("row " + std::to_string(i + 2) + ": missing value in column '" + spec.name + "'");
            if (spec.is_categorical()) {
                const auto it = std::find(spec.categories.begin(), spec.categories.end(), cell);
                if (it == spec.categories.end())
                    throw ParseError("row " + std::to_string(i + 2) + ": unknown category '" + cell +
                                     "' for feature '" + spec.name + "'");
                inst[k] = static_cast<double>(it - spec.categories.begin());
            } else {
                double v;
                if (!parse_number(cell, v))
                    throw ParseError("row " + std::to_string(i + 2) + ": cannot parse '" + cell +
                                     "' as a number in column '" + spec.name + "'");
                inst[k] = v;
            }
        }
        ds.rows.push_back(std::move(inst));
    }

    if (label_idx >= 0) {
        // Labels are small non-negative integers or category strings; map
        // strings to indices in order of first appearance.
        std::vector<int> labels;
        std::map<std::string, int> mapping;
        bool all_int = true;
        for (const auto& row : cells) {
            const std::string& cell = row[static_cast<std::size_t>(label_idx)];
            double v;
            if (!parse_number(cell, v) || v != std::floor(v) || v < 0) {
                all_int = false;
                break;
            }
        }
        for (const auto& row : cells) {
            const std::string& cell = row[static_cast<std::size_t>(label_idx)];
            if (all_int) {
                labels.push_back(static_cast<int>(std::strtod(cell.c_str(), nullptr)));
            } else {
                auto [it, inserted] = mapping.try_emplace(cell, static_cast<int>(mapping.size()));
                labels.push_back(it->second);
            }
        }
        ds.labels = std::move(labels);
    }

    ds.recompute_stats();
    return ds;
}

Dataset load_dataset(const std::string& path,
                     const std::optional<std::vector<FeatureSpec>>& schema,
                     const std::optional<std::string>& label_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), schema, label_column);
}

std::string to_csv(const Dataset& ds, const std::string& label_column) {
    std::ostringstream out;
    for (std::size_t j = 0; j < ds.specs.size(); ++j) {
        if (j) out << ',';
        out << (needs_quoting(ds.specs[j].name) ? quote(ds.specs[j].name) : ds.specs[j].name);
    }
    if (ds.labels) out << ',' << label_column;
    out << '\n';
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        for (std::size_t j = 0; j < ds.specs.size(); ++j) {
            if (j) out << ',';
            if (ds.specs[j].is_categorical()) {
                const auto& cat = ds.specs[j].categories[static_cast<std::size_t>(ds.rows[i][j])];
                out << (needs_quoting(cat) ? quote(cat) : cat);
            } else {
                out << format_cell(ds.rows[i][j]);
            }
        }
        if (ds.labels) out << ',' << (*ds.labels)[i];
        out << '\n';
    }
    return out.str();
}

void write_csv(const Dataset& ds, const std::string& path, const std::string& label_column) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << to_csv(ds, label_column);
}

Dataset synthesize_dataset(SyntheticKind kind, std::size_t n, double noise, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("synthetic dataset needs n >= 2");
    if (noise < 0) throw InvalidArgument("noise must be >= 0");
    Dataset ds;
    ds.specs = {{"x1", FeatureKind::Numerical, {}}, {"x2", FeatureKind::Numerical, {}}};
    ds.rows.reserve(n);
    std::vector<int> labels;
    labels.reserve(n);
    Rng rng(seed);
    const double pi = 3.14159265358979323846;

    const std::size_t n_out = n / 2 + n % 2;
    const std::size_t n_in = n - n_out;

    switch (kind) {
        case SyntheticKind::Moons: {
            // Two interleaving half-circles: outer upper arc (class 0),
            // inner lower arc shifted right (class 1).
            for (std::size_t i = 0; i < n_out; ++i) {
                const double t = n_out > 1 ? pi * static_cast<double>(i) / static_cast<double>(n_out - 1) : 0.0;
                ds.rows.push_back({std::cos(t), std::sin(t)});
                labels.push_back(0);
            }
            for (std::size_t i = 0; i < n_in; ++i) {
                const double t = n_in > 1 ? pi * static_cast<double>(i) / static_cast<double>(n_in - 1) : 0.0;
                ds.rows.push_back({1.0 - std::cos(t), 0.5 - std::sin(t)});
                labels.push_back(1);
            }
            break;
        }
        case SyntheticKind::Circles: {
            // Concentric rings, outer radius 1 (class 0), inner radius 0.5 (class 1).
            const double factor = 0.5;
            for (std::size_t i = 0; i < n_out; ++i) {
                const double t = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n_out);
                ds.rows.push_back({std::cos(t), std::sin(t)});
                labels.push_back(0);
            }
            for (std::size_t i = 0; i < n_in; ++i) {
                const double t = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n_in);
                ds.rows.push_back({factor * std::cos(t), factor * std::sin(t)});
                labels.push_back(1);
            }
            break;
        }
        case SyntheticKind::Blobs: {
            // Two isotropic Gaussians at (-3,-3) and (3,3); `noise` scales
            // the unit spread on top of the base cluster std of 1.
            const double spread = 1.0 + noise;
            for (std::size_t i = 0; i < n; ++i) {
                const int c = i < n_out ? 0 : 1;
                const double cx = c == 0 ? -3.0 : 3.0;
                const double cy = c == 0 ? -3.0 : 3.0;
                ds.rows.push_back({cx + spread * rng.gaussian(), cy + spread * rng.gaussian()});
                labels.push_back(c);
            }
            ds.labels = std::move(labels);
            ds.recompute_stats();
            return ds;
        }
    }
    if (noise > 0) {
        for (auto& row : ds.rows) {
            row[0] += noise * rng.gaussian();
            row[1] += noise * rng.gaussian();
        }
    }
    ds.labels = std::move(labels);
    ds.recompute_stats();
    return ds;
}

ReferenceStats compute_stats(const Dataset& ds, const Instance& reference) {
    if (ds.rows.empty()) throw InvalidArgument("cannot compute stats on an empty dataset");
    check_instance(ds, reference);
    ReferenceStats rs;
    rs.per_feature = ds.stats;
    DistanceContext ctx;
    ctx.specs = ds.specs;
    ctx.stats = ds.stats;
    ctx.delta = 1.0;
    double best = 0.0;
    for (const auto& row : ds.rows) best = std::max(best, standardized_distance(reference, row, ctx));
    if (best <= 0.0)
        throw InvalidArgument("degenerate reference: no dataset row is distinct from the reference");
    rs.delta = best;
    return rs;
}

void check_instance(const Dataset& ds, const Instance& inst) {
    if (inst.size() != ds.specs.size())
        throw InvalidArgument("instance arity " + std::to_string(inst.size()) + " != dataset arity " +
                              std::to_string(ds.specs.size()));
    for (std::size_t j = 0; j < inst.size(); ++j) {
        if (ds.specs[j].is_categorical()) {
            const double v = inst[j];
            if (v != std::floor(v) || v < 0 || v >= static_cast<double>(ds.specs[j].categories.size()))
                throw InvalidArgument("categorical index " + std::to_string(v) + " out of range for feature '" +
                                      ds.specs[j].name + "'");
        } else if (!std::isfinite(inst[j])) {
            throw InvalidArgument("non-finite value for feature '" + ds.specs[j].name + "'");
        }
    }
}

}  // namespace ape
