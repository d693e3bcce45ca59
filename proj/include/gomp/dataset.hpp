#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gomp {

enum class FeatureKind { Continuous, Categorical };
enum class OutcomeKind { Continuous, Binary, Survival };

struct FeatureColumn {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    Eigen::VectorXd values;          // level codes for Categorical
    int level_count = 0;             // Categorical only
    bool excluded = false;           // constant column, removed from candidacy
    std::vector<std::string> level_labels;  // original tokens, first-appearance order
};

struct Outcome {
    OutcomeKind kind = OutcomeKind::Continuous;
    Eigen::VectorXd y;      // Continuous / Binary
    Eigen::VectorXd time;   // Survival
    Eigen::VectorXd event;  // Survival, 1 = observed, 0 = censored
    Eigen::Index n() const {
        return kind == OutcomeKind::Survival ? time.size() : y.size();
    }
};

struct Dataset {
    std::vector<FeatureColumn> features;
    Outcome outcome;
    Eigen::Index n() const { return outcome.n(); }
    int p() const { return static_cast<int>(features.size()); }
    void validate() const;  // throws std::invalid_argument on broken invariants
};

// Column roles for ingestion. Exactly one outcome column (or a time+event pair).
enum class ColumnRole { FeatureContinuous, FeatureCategorical, OutcomeCol, Time, Event, Ignore };

struct Schema {
    std::map<std::string, ColumnRole> roles;
    // Required when an OutcomeCol is present and the kind cannot be inferred.
    std::optional<OutcomeKind> outcome_kind;
};

class IngestionError : public std::runtime_error {
  public:
    IngestionError(const std::string& msg, long row, const std::string& column)
        : std::runtime_error(msg), row(row), column(column) {}
    long row;            // 1-based data row, 0 if not row-specific
    std::string column;
};

Schema load_schema_json(const std::string& path);
void write_schema_json(const Dataset& d, const std::string& path);

// CSV: comma separated, header row, UTF-8, '.' decimal. Missing values reject.
Dataset load_csv(const std::string& path, const Schema& schema);
void write_csv(const Dataset& d, const std::string& path);

struct StandardizationRecord {
    std::vector<double> mean;   // per feature (0 for categorical/excluded)
    std::vector<double> norm;   // per feature (1 for categorical/excluded)
    std::vector<int> excluded;  // indices of constant continuous columns
    bool outcome_standardized = false;
    double outcome_mean = 0.0;
    double outcome_norm = 1.0;
};

struct Standardized {
    Dataset data;
    StandardizationRecord record;
};

// Center continuous features (and a continuous outcome) and scale them to unit
// Euclidean norm. Constant continuous columns are flagged excluded, not an error.
Standardized standardize(const Dataset& d);

}  // namespace gomp
