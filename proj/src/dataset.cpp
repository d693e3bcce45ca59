#include "gomp/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace gomp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_double(const std::string& tok, double& out) {
    if (tok.empty()) return false;
    char* end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size();
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ColumnRole role_from_name(const std::string& s) {
    if (s == "feature-continuous") return ColumnRole::FeatureContinuous;
    if (s == "feature-categorical") return ColumnRole::FeatureCategorical;
    if (s == "outcome") return ColumnRole::OutcomeCol;
    if (s == "time") return ColumnRole::Time;
    if (s == "event") return ColumnRole::Event;
    if (s == "ignore") return ColumnRole::Ignore;
    throw IngestionError("unknown column role '" + s + "'", 0, "");
}

}  // namespace

void Dataset::validate() const {
    const Eigen::Index nn = n();
    std::map<std::string, int> seen;
    for (const auto& f : features) {
        if (f.values.size() != nn)
            throw std::invalid_argument("column '" + f.name + "' length mismatch");
        if (++seen[f.name] > 1)
            throw std::invalid_argument("duplicate feature name '" + f.name + "'");
        if (f.kind == FeatureKind::Continuous) {
            for (Eigen::Index i = 0; i < nn; ++i)
                if (!std::isfinite(f.values[i]))
                    throw std::invalid_argument("non-finite value in column '" + f.name + "'");
        } else {
            if (f.level_count < 2)
                throw std::invalid_argument("categorical column '" + f.name + "' needs >= 2 levels");
            for (Eigen::Index i = 0; i < nn; ++i) {
                double v = f.values[i];
                if (v != std::floor(v) || v < 0 || v >= f.level_count)
                    throw std::invalid_argument("bad level code in column '" + f.name + "'");
            }
        }
    }
    switch (outcome.kind) {
        case OutcomeKind::Continuous:
            break;
        case OutcomeKind::Binary: {
            bool has0 = false, has1 = false;
            for (Eigen::Index i = 0; i < nn; ++i) {
                if (outcome.y[i] == 0.0) has0 = true;
                else if (outcome.y[i] == 1.0) has1 = true;
                else throw std::invalid_argument("binary outcome values must be 0/1");
            }
            if (!has0 || !has1)
                throw std::invalid_argument("binary outcome needs both classes");
            break;
        }
        case OutcomeKind::Survival:
            if (outcome.event.size() != nn)
                throw std::invalid_argument("survival time/event length mismatch");
            for (Eigen::Index i = 0; i < nn; ++i) {
                if (!(outcome.time[i] > 0.0))
                    throw std::invalid_argument("survival times must be strictly positive");
                if (outcome.event[i] != 0.0 && outcome.event[i] != 1.0)
                    throw std::invalid_argument("event indicator must be 0/1");
            }
            break;
    }
}

Schema load_schema_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open schema file " + path, 0, "");
    nlohmann::json j;
    in >> j;
    Schema s;
    for (auto& [name, role] : j.at("columns").items())
        s.roles[name] = role_from_name(role.get<std::string>());
    if (j.contains("outcome_kind")) {
        std::string k = j["outcome_kind"].get<std::string>();
        if (k == "continuous") s.outcome_kind = OutcomeKind::Continuous;
        else if (k == "binary") s.outcome_kind = OutcomeKind::Binary;
        else if (k == "survival") s.outcome_kind = OutcomeKind::Survival;
        else throw IngestionError("unknown outcome_kind '" + k + "'", 0, "");
    }
    return s;
}

void write_schema_json(const Dataset& d, const std::string& path) {
    nlohmann::json cols = nlohmann::json::object();
    for (const auto& f : d.features)
        cols[f.name] = f.kind == FeatureKind::Continuous ? "feature-continuous"
                                                         : "feature-categorical";
    std::string kind;
    if (d.outcome.kind == OutcomeKind::Survival) {
        cols["time"] = "time";
        cols["event"] = "event";
        kind = "survival";
    } else {
        cols["y"] = "outcome";
        kind = d.outcome.kind == OutcomeKind::Binary ? "binary" : "continuous";
    }
    nlohmann::json j{{"columns", cols}, {"outcome_kind", kind}};
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

Dataset load_csv(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path, 0, "");

    std::string line;
    if (!std::getline(in, line)) throw IngestionError("empty file " + path, 0, "");
    std::vector<std::string> header = split_csv_line(line);

    std::vector<ColumnRole> roles(header.size());
    for (size_t c = 0; c < header.size(); ++c) {
        auto it = schema.roles.find(header[c]);
        if (it == schema.roles.end())
            throw IngestionError("column '" + header[c] + "' has no declared role", 0, header[c]);
        roles[c] = it->second;
    }

    int outcome_col = -1, time_col = -1, event_col = -1;
    for (size_t c = 0; c < roles.size(); ++c) {
        if (roles[c] == ColumnRole::OutcomeCol) {
            if (outcome_col >= 0) throw IngestionError("multiple outcome columns", 0, header[c]);
            outcome_col = static_cast<int>(c);
        } else if (roles[c] == ColumnRole::Time) {
            time_col = static_cast<int>(c);
        } else if (roles[c] == ColumnRole::Event) {
            event_col = static_cast<int>(c);
        }
    }
    const bool survival = time_col >= 0 || event_col >= 0;
    if (survival && (time_col < 0 || event_col < 0 || outcome_col >= 0))
        throw IngestionError("survival schema requires exactly a time+event pair", 0, "");
    if (!survival && outcome_col < 0)
        throw IngestionError("schema names no outcome column", 0, "");

    std::vector<std::vector<std::string>> raw(header.size());
    long row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        std::vector<std::string> toks = split_csv_line(line);
        if (toks.size() != header.size())
            throw IngestionError("row has " + std::to_string(toks.size()) + " fields, expected " +
                                     std::to_string(header.size()),
                                 row, "");
        for (size_t c = 0; c < toks.size(); ++c) raw[c].push_back(toks[c]);
    }
    const long n = row;
    if (n == 0) throw IngestionError("no data rows in " + path, 0, "");

    auto parse_numeric_col = [&](int c) {
        Eigen::VectorXd v(n);
        for (long i = 0; i < n; ++i) {
            const std::string& tok = raw[c][i];
            if (tok.empty())
                throw IngestionError("missing value", i + 1, header[c]);
            double x;
            if (!parse_double(tok, x) || !std::isfinite(x))
                throw IngestionError("non-numeric token '" + tok + "'", i + 1, header[c]);
            v[i] = x;
        }
        return v;
    };

    Dataset d;
    for (size_t c = 0; c < header.size(); ++c) {
        switch (roles[c]) {
            case ColumnRole::FeatureContinuous: {
                FeatureColumn f;
                f.name = header[c];
                f.kind = FeatureKind::Continuous;
                f.values = parse_numeric_col(static_cast<int>(c));
                d.features.push_back(std::move(f));
                break;
            }
            case ColumnRole::FeatureCategorical: {
                FeatureColumn f;
                f.name = header[c];
                f.kind = FeatureKind::Categorical;
                f.values.resize(n);
                std::map<std::string, int> codes;
                for (long i = 0; i < n; ++i) {
                    const std::string& tok = raw[c][i];
                    if (tok.empty()) throw IngestionError("missing value", i + 1, header[c]);
                    auto it = codes.find(tok);
                    if (it == codes.end()) {
                        it = codes.emplace(tok, static_cast<int>(f.level_labels.size())).first;
                        f.level_labels.push_back(tok);
                    }
                    f.values[i] = it->second;
                }
                f.level_count = static_cast<int>(f.level_labels.size());
                if (f.level_count < 2)
                    throw IngestionError("categorical column has a single level", 0, header[c]);
                d.features.push_back(std::move(f));
                break;
            }
            default:
                break;
        }
    }

    if (survival) {
        d.outcome.kind = OutcomeKind::Survival;
        d.outcome.time = parse_numeric_col(time_col);
        d.outcome.event = parse_numeric_col(event_col);
        for (long i = 0; i < n; ++i) {
            if (!(d.outcome.time[i] > 0.0))
                throw IngestionError("survival time must be > 0", i + 1, header[time_col]);
            if (d.outcome.event[i] != 0.0 && d.outcome.event[i] != 1.0)
                throw IngestionError("event indicator must be 0/1", i + 1, header[event_col]);
        }
    } else {
        Eigen::VectorXd y = parse_numeric_col(outcome_col);
        OutcomeKind kind;
        if (schema.outcome_kind) {
            kind = *schema.outcome_kind;
        } else {
            bool all01 = true;
            for (long i = 0; i < n; ++i)
                if (y[i] != 0.0 && y[i] != 1.0) { all01 = false; break; }
            kind = all01 ? OutcomeKind::Binary : OutcomeKind::Continuous;
        }
        d.outcome.kind = kind;
        d.outcome.y = std::move(y);
    }

    d.validate();
    return d;
}

void write_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write " + path, 0, "");
    const Eigen::Index n = d.n();

    bool first = true;
    auto emit = [&](const std::string& s) {
        if (!first) out << ',';
        out << s;
        first = false;
    };
    for (const auto& f : d.features) emit(f.name);
    if (d.outcome.kind == OutcomeKind::Survival) {
        emit("time");
        emit("event");
    } else {
        emit("y");
    }
    out << '\n';

    for (Eigen::Index i = 0; i < n; ++i) {
        first = true;
        for (const auto& f : d.features) {
            if (f.kind == FeatureKind::Categorical && !f.level_labels.empty())
                emit(f.level_labels[static_cast<int>(f.values[i])]);
            else
                emit(fmt_double(f.values[i]));
        }
        if (d.outcome.kind == OutcomeKind::Survival) {
            emit(fmt_double(d.outcome.time[i]));
            emit(fmt_double(d.outcome.event[i]));
        } else {
            emit(fmt_double(d.outcome.y[i]));
        }
        out << '\n';
    }
}

Standardized standardize(const Dataset& d) {
    Standardized out;
    out.data = d;
    auto& rec = out.record;
    rec.mean.assign(d.features.size(), 0.0);
    rec.norm.assign(d.features.size(), 1.0);
    const double n = static_cast<double>(d.n());

    for (size_t j = 0; j < out.data.features.size(); ++j) {
        FeatureColumn& f = out.data.features[j];
        if (f.kind != FeatureKind::Continuous) continue;
        double mean = f.values.mean();
        Eigen::VectorXd centered = f.values.array() - mean;
        double norm = centered.norm();
        if (norm < 1e-12 * std::sqrt(n) * (1.0 + std::fabs(mean))) {
            f.excluded = true;
            rec.excluded.push_back(static_cast<int>(j));
            continue;
        }
        f.values = centered / norm;
        rec.mean[j] = mean;
        rec.norm[j] = norm;
    }
    if (out.data.outcome.kind == OutcomeKind::Continuous) {
        double mean = out.data.outcome.y.mean();
        Eigen::VectorXd centered = out.data.outcome.y.array() - mean;
        double norm = centered.norm();
        if (norm > 0) {
            out.data.outcome.y = centered / norm;
            rec.outcome_standardized = true;
            rec.outcome_mean = mean;
            rec.outcome_norm = norm;
        }
    }
    return out;
}

}  // namespace gomp
