#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gomp/cv.hpp"
#include "gomp/dataset.hpp"

using namespace gomp;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

Schema basic_schema() {
    Schema s;
    s.roles = {{"y", ColumnRole::OutcomeCol},
               {"x1", ColumnRole::FeatureContinuous},
               {"x2", ColumnRole::FeatureContinuous}};
    s.outcome_kind = OutcomeKind::Continuous;
    return s;
}

}  // namespace

TEST_CASE("load_csv parses a numeric file") {
    auto path = write_temp("ds_basic.csv", "y,x1,x2\n1,0.5,2\n2,1.5,3\n3,2.5,4\n");
    Dataset d = load_csv(path, basic_schema());
    CHECK(d.n() == 3);
    CHECK(d.p() == 2);
    CHECK(d.outcome.kind == OutcomeKind::Continuous);
    CHECK(d.features[0].values[1] == 1.5);
}

TEST_CASE("categorical coding follows first appearance") {
    auto path = write_temp("ds_cat.csv", "y,c\n1,a\n2,b\n3,a\n");
    Schema s;
    s.roles = {{"y", ColumnRole::OutcomeCol}, {"c", ColumnRole::FeatureCategorical}};
    s.outcome_kind = OutcomeKind::Continuous;
    Dataset d = load_csv(path, s);
    CHECK(d.features[0].level_count == 2);
    CHECK(d.features[0].values[0] == 0.0);
    CHECK(d.features[0].values[1] == 1.0);
    CHECK(d.features[0].values[2] == 0.0);
}

TEST_CASE("ingestion errors carry row and column") {
    auto missing = write_temp("ds_missing.csv", "y,x1,x2\n1,,2\n2,1,3\n3,2,4\n");
    CHECK_THROWS_AS(load_csv(missing, basic_schema()), IngestionError);
    try {
        load_csv(missing, basic_schema());
    } catch (const IngestionError& e) {
        CHECK(e.row == 1);
        CHECK(e.column == "x1");
    }

    auto bad = write_temp("ds_bad.csv", "y,x1,x2\n1,zap,2\n");
    CHECK_THROWS_AS(load_csv(bad, basic_schema()), IngestionError);

    auto t0 = write_temp("ds_t0.csv", "time,event,x1\n0,1,0.5\n2,0,1.5\n");
    Schema surv;
    surv.roles = {{"time", ColumnRole::Time},
                  {"event", ColumnRole::Event},
                  {"x1", ColumnRole::FeatureContinuous}};
    CHECK_THROWS_AS(load_csv(t0, surv), IngestionError);
}

TEST_CASE("csv round trip is identity") {
    auto path = write_temp("ds_rt.csv", "y,x1,x2\n0.25,0.5,2\n2,1.5,3\n-3,2.5,4.75\n");
    Dataset d = load_csv(path, basic_schema());
    auto out = (std::filesystem::temp_directory_path() / "ds_rt2.csv").string();
    write_csv(d, out);
    Dataset d2 = load_csv(out, basic_schema());
    CHECK(d2.n() == d.n());
    for (int j = 0; j < d.p(); ++j)
        CHECK((d2.features[j].values - d.features[j].values).cwiseAbs().maxCoeff() == 0.0);
    CHECK((d2.outcome.y - d.outcome.y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("schema json round trip") {
    auto path = write_temp("ds_s.csv", "y,x1,x2\n1,0.5,2\n2,1.5,3\n3,2.5,4\n");
    Dataset d = load_csv(path, basic_schema());
    auto spath = (std::filesystem::temp_directory_path() / "ds_schema.json").string();
    write_schema_json(d, spath);
    Schema s = load_schema_json(spath);
    CHECK(s.roles.at("x1") == ColumnRole::FeatureContinuous);
    CHECK(s.roles.at("y") == ColumnRole::OutcomeCol);
    CHECK(s.outcome_kind == OutcomeKind::Continuous);
}

TEST_CASE("standardize centers and scales continuous columns") {
    Dataset d;
    FeatureColumn f;
    f.name = "x";
    f.values = Eigen::Vector3d(1, 2, 3);
    d.features.push_back(f);
    d.outcome.kind = OutcomeKind::Continuous;
    d.outcome.y = Eigen::Vector3d(2, 4, 9);

    auto s = standardize(d);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(s.data.features[0].values[0] == doctest::Approx(-inv_sqrt2).epsilon(1e-12));
    CHECK(s.data.features[0].values[1] == doctest::Approx(0.0));
    CHECK(s.data.features[0].values[2] == doctest::Approx(inv_sqrt2).epsilon(1e-12));
    CHECK(s.record.mean[0] == doctest::Approx(2.0));

    SUBCASE("idempotence") {
        auto s2 = standardize(s.data);
        CHECK((s2.data.features[0].values - s.data.features[0].values).cwiseAbs().maxCoeff() <
              1e-12);
    }
    SUBCASE("post invariants") {
        CHECK(std::fabs(s.data.features[0].values.mean()) < 1e-10);
        CHECK(std::fabs(s.data.features[0].values.norm() - 1.0) < 1e-10);
        CHECK(std::fabs(s.data.outcome.y.mean()) < 1e-10);
        CHECK(std::fabs(s.data.outcome.y.norm() - 1.0) < 1e-10);
    }
}

TEST_CASE("constant continuous columns get flagged, not rejected") {
    Dataset d;
    FeatureColumn f;
    f.name = "c";
    f.values = Eigen::Vector3d(5, 5, 5);
    d.features.push_back(f);
    d.outcome.kind = OutcomeKind::Continuous;
    d.outcome.y = Eigen::Vector3d(1, 2, 3);
    auto s = standardize(d);
    CHECK(s.data.features[0].excluded);
    REQUIRE(s.record.excluded.size() == 1);
    CHECK(s.record.excluded[0] == 0);
}

TEST_CASE("binary outcome requires both classes") {
    auto path = write_temp("ds_one_class.csv", "y,x1,x2\n1,0.5,2\n1,1.5,3\n");
    Schema s = basic_schema();
    s.outcome_kind = OutcomeKind::Binary;
    CHECK_THROWS(load_csv(path, s));
}

TEST_CASE("standardization statistics come from the fitted rows only") {
    // train/test hygiene used by run_cv: perturbing rows outside the record's
    // source must not change the transform
    Dataset d;
    FeatureColumn f;
    f.name = "x";
    f.values = Eigen::VectorXd::LinSpaced(10, 0, 9);
    d.features.push_back(f);
    d.outcome.kind = OutcomeKind::Continuous;
    d.outcome.y = Eigen::VectorXd::Random(10);

    std::vector<int> train_rows{0, 1, 2, 3, 4};
    Dataset train = subset_rows(d, train_rows);
    auto st = standardize(train);

    Dataset test = subset_rows(d, {5, 6, 7, 8, 9});
    test.features[0].values[0] = 1e6;  // perturbation
    apply_standardization(st.record, test);
    CHECK(st.record.mean[0] == doctest::Approx(2.0));
    // transform of unperturbed entries is unaffected
    CHECK(test.features[0].values[1] == doctest::Approx((6.0 - 2.0) / st.record.norm[0]));
}
