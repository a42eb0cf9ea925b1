#include <doctest.h>

#include <filesystem>

#include "latfrac/campaign.hpp"
#include "latfrac/svg.hpp"

using namespace latfrac;
namespace fs = std::filesystem;

namespace {

// small and fast: direct tension on a notched 24x24 patch
const char* kTinyConfig = R"({
  "geometry": {"width": 24, "height": 24, "notches": [[-1, 11, 6, 13]]},
  "mesh": {"l_m": 2.0},
  "protocol": {"kind": "direct"},
  "seeds": {"mesh": 5, "grains": 6}
})";

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
    const RunConfig cfg = parse_config_json(R"({"geometry": {"width": 30, "height": 40}})");
    CHECK(cfg.material.matrix.Kn_bar == 16500.0);
    CHECK(cfg.material.matrix.Kt_bar == 5100.0);
    CHECK(cfg.material.exponent == 5.0);
    CHECK(cfg.material.inclusion.Kn_bar == doctest::Approx(165000.0));
    CHECK(cfg.material.itz.sigma_n0 == doctest::Approx(3.035));
    CHECK_FALSE(cfg.material.bar.breakable);
    CHECK(cfg.specimen.l_m == 2.0);
    CHECK(cfg.specimen.mesh_options.perturbation_ratio == 0.4);
    CHECK(cfg.grains.spec.kind == GradingSpec::Kind::none);
    CHECK(cfg.run.solver.tol_rel == 1e-10);

    // the hash is stable across identical parses
    const RunConfig again = parse_config_json(R"({"geometry": {"width": 30, "height": 40}})");
    CHECK(cfg.hash() == again.hash());
    CHECK(cfg.hash().size() == 16);
}

TEST_CASE("canonical serialization reparses to the same hash") {
    for (const std::string& preset : preset_names()) {
        const RunConfig cfg = preset_config(preset);
        const RunConfig back = parse_config_json(cfg.canonical_json());
        CHECK(back.hash() == cfg.hash());
    }
}

TEST_CASE("config validation names the offending field") {
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"geometry": {"width": -3, "height": 40}})"),
                         doctest::Contains("geometry.width"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"geometry": {"width": 30, "height": 40},
                                               "material": {"exponent": 0.5}})"),
                         doctest::Contains("material.exponent"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_config_json(R"({"geometry": {"width": 30, "height": 40},
                              "material": {"elastic": {"E_GPa": 10, "nu": 0.4}}})"),
        doctest::Contains("material.elastic"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_json("{"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"geometry": {"width": 4, "height": 40}})"),
                         doctest::Contains("3 * mesh.l_m"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"preset": "nope"})"), doctest::Contains("preset"),
                         std::invalid_argument);
}

TEST_CASE("presets carry their published geometry") {
    const RunConfig ld = preset_config("ld-40x160");
    CHECK(ld.specimen.outline.width() == 40.0);
    CHECK(ld.specimen.outline.height() == 160.0);
    CHECK(ld.specimen.protocol.kind == ProtocolKind::ld);
    CHECK(ld.specimen.notches.size() == 2);

    const RunConfig dd = preset_config("dd-40x160");
    CHECK(dd.specimen.protocol.kind == ProtocolKind::dd);
    CHECK(dd.specimen.notches.empty());

    // the ligament family: 100 mm square, one edge notch of depth c
    const double depths[] = {10.0, 20.0, 35.0, 50.0};
    const char* names[] = {"ligament-L", "ligament-M", "ligament-S", "ligament-XS"};
    for (int k = 0; k < 4; ++k) {
        const RunConfig lig = preset_config(names[k]);
        CHECK(lig.specimen.outline.width() == 100.0);
        CHECK(lig.specimen.outline.height() == 100.0);
        REQUIRE(lig.specimen.notches.size() == 1);
        CHECK(lig.specimen.notches[0].x1 == depths[k]);
        CHECK(lig.specimen.notches[0].y1 - lig.specimen.notches[0].y0 == 2.0);
        CHECK(lig.specimen.l_m == 1.5);
    }
}

TEST_CASE("default material JSON mentions the bulk values") {
    const std::string text = default_material_json();
    CHECK(text.find("16.5") != std::string::npos);
    CHECK(text.find("5.1") != std::string::npos);
    CHECK(text.find("6.07") != std::string::npos);
    CHECK(text.find("18.21") != std::string::npos);
    CHECK(text.find("exponent") != std::string::npos);
}

TEST_CASE("single run produces a record with analysis attached") {
    const RunConfig cfg = parse_config_json(kTinyConfig);
    const RunResult res = run_single(cfg);
    CHECK(res.record.events.size() >= 5);
    CHECK(res.record.config_hash == cfg.hash());
    CHECK(res.gf > 0.0);
    CHECK(res.fpz_ok);
    CHECK(res.l_fpz > 0.0);

    // repeatable bit for bit
    const RunResult res2 = run_single(cfg);
    CHECK(record_to_json(res2.record) == record_to_json(res.record));
}

TEST_CASE("campaigns are reproducible and aggregate their replicates") {
    CampaignSpec spec;
    spec.base = parse_config_json(kTinyConfig);
    spec.replicates = 2;
    spec.master_seed = 99;
    spec.sweep.kind = CampaignSweep::Kind::mesh_size;
    spec.sweep.mesh_sizes = {2.0, 2.7};

    const CampaignSummary s1 = run_campaign(spec, 2);
    const CampaignSummary s2 = run_campaign(spec, 1);  // thread count must not matter
    REQUIRE(s1.runs.size() == 4);
    REQUIRE(s2.runs.size() == 4);
    for (std::size_t k = 0; k < s1.runs.size(); ++k) {
        REQUIRE(s1.runs[k].ok);
        CHECK(s1.runs[k].ld.record.config_hash == s2.runs[k].ld.record.config_hash);
        CHECK(record_to_json(s1.runs[k].ld.record) == record_to_json(s2.runs[k].ld.record));
    }
    CHECK(s1.failures.empty());

    // aggregates equal the hand average of the per-run values
    for (const auto& point : s1.points) {
        double sum = 0.0;
        int n = 0;
        for (const auto& run : s1.runs) {
            if (run.point_label != point.label || !run.ld.fpz_ok) continue;
            sum += run.ld.l_fpz;
            ++n;
        }
        REQUIRE(n == point.completed);
        CHECK(point.mean_lfpz == doctest::Approx(sum / n).epsilon(1e-12));
    }

    // single-replicate points report zero scatter
    CampaignSpec one = spec;
    one.replicates = 1;
    one.sweep.mesh_sizes = {2.0};
    const CampaignSummary s3 = run_campaign(one, 1);
    REQUIRE(s3.points.size() == 1);
    CHECK(s3.points[0].std_lfpz == 0.0);
}

TEST_CASE("path (a) reuses inclusion centers bit for bit across diameters") {
    CampaignSpec spec;
    spec.base = parse_config_json(R"({
      "geometry": {"width": 40, "height": 40, "notches": [[-1, 19, 6, 21]]},
      "mesh": {"l_m": 2.0},
      "protocol": {"kind": "direct"},
      "grading": {"kind": "monodisperse", "d": 8, "fraction": 0.2, "gap": 0.5}
    })");
    spec.replicates = 2;
    spec.master_seed = 7;
    spec.sweep.kind = CampaignSweep::Kind::path_a;
    spec.sweep.d_values = {5.0, 8.0};
    spec.sweep.fixed_fraction = 0.2;

    const CampaignSummary s = run_campaign(spec, 2);
    REQUIRE(s.runs.size() == 4);
    for (int rep = 0; rep < 2; ++rep) {
        const CampaignRun* small = nullptr;
        const CampaignRun* large = nullptr;
        for (const auto& run : s.runs) {
            if (run.replicate != rep) continue;
            if (run.parameter == 5.0) small = &run;
            if (run.parameter == 8.0) large = &run;
        }
        REQUIRE(small != nullptr);
        REQUIRE(large != nullptr);
        REQUIRE(small->ok);
        REQUIRE(large->ok);
        REQUIRE(small->ld.grains.inclusions.size() == large->ld.grains.inclusions.size());
        for (std::size_t k = 0; k < small->ld.grains.inclusions.size(); ++k) {
            CHECK(small->ld.grains.inclusions[k].center.x == large->ld.grains.inclusions[k].center.x);
            CHECK(small->ld.grains.inclusions[k].center.y == large->ld.grains.inclusions[k].center.y);
            CHECK(small->ld.grains.inclusions[k].diameter == 5.0);
            CHECK(large->ld.grains.inclusions[k].diameter == 8.0);
        }
    }
}

TEST_CASE("campaign outputs land on disk and reruns are byte identical") {
    CampaignSpec spec;
    spec.base = parse_config_json(kTinyConfig);
    spec.replicates = 1;
    spec.master_seed = 13;
    spec.sweep.kind = CampaignSweep::Kind::mesh_size;
    spec.sweep.mesh_sizes = {2.0, 2.7};

    const fs::path dir1 = fs::temp_directory_path() / "latfrac_test_out1";
    const fs::path dir2 = fs::temp_directory_path() / "latfrac_test_out2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    emit_outputs(run_campaign(spec, 2), spec, dir1.string());
    emit_outputs(run_campaign(spec, 1), spec, dir2.string());

    for (const char* name : {"runs.csv", "points.csv", "summary.json"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(dir1 / name));
        CHECK(read_text_file((dir1 / name).string()) == read_text_file((dir2 / name).string()));
    }
    CHECK(fs::exists(dir1 / "lfpz_vs_parameter.svg"));
    CHECK(fs::exists(dir1 / "runs" / "lm2_r0" / "events.csv"));
    CHECK(fs::exists(dir1 / "runs" / "lm2_r0" / "record.json"));
    CHECK(fs::exists(dir1 / "runs" / "lm2_r0" / "elements.csv"));
    CHECK(read_text_file((dir1 / "runs" / "lm2_r0" / "events.csv").string()) ==
          read_text_file((dir2 / "runs" / "lm2_r0" / "events.csv").string()));
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("an empty campaign summary emits header-only tables") {
    CampaignSummary empty;
    CampaignSpec spec;
    spec.base = preset_config("ld-40x160");
    const fs::path dir = fs::temp_directory_path() / "latfrac_test_empty";
    fs::remove_all(dir);
    emit_outputs(empty, spec, dir.string());
    const std::string runs = read_text_file((dir / "runs.csv").string());
    CHECK(runs.find("point,label,parameter") == 0);
    CHECK(runs.find('\n') == runs.size() - 1);
    fs::remove_all(dir);
}

TEST_CASE("jobs resolution prefers cli, then spec, then the environment") {
    CHECK(resolve_jobs(3, 7) == 3);
    CHECK(resolve_jobs(0, 7) == 7);
    CHECK(resolve_jobs(0, 0) >= 1);
}
