#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <cmath>

#include "lossroute/errors.hpp"
#include "lossroute/instance.hpp"

using namespace lossroute;
using doctest::Approx;

namespace {
SystemInstance experiment1(double lambda = 190) {
    return {lambda, {{1, 16, 80}, {4, 12, 15}, {10, 10, 5}}};
}
SystemInstance experiment2(double lambda = 3200) {
    return {lambda, {{1, 18, 1440}, {6, 12, 160}, {8, 10, 100}}};
}
} // namespace

TEST_CASE("nominal load") {
    CHECK(nominal_load(experiment1()) == Approx(1.0).epsilon(1e-15));
    CHECK(nominal_load(SystemInstance(1.0, {{1, 1, 2.0}})) == Approx(0.5));
    CHECK(nominal_load(experiment2(3200 * 0.85)) == Approx(0.85).epsilon(1e-15));
}

TEST_CASE("scaling") {
    CHECK(scale_to_nominal_load(experiment1(), 0.7).lambda() == Approx(133).epsilon(1e-15));
    CHECK(scale_to_nominal_load(experiment2(), 1.2).lambda() == Approx(3840).epsilon(1e-15));
    const auto e = experiment1(150);
    CHECK(scale_to_nominal_load(e, nominal_load(e)).lambda() == Approx(150).epsilon(1e-15));
    CHECK_THROWS_AS(scale_to_nominal_load(e, 0.0), ValidationError);
    for (double a : {0.3, 0.77, 1.9}) {
        for (double b : {0.7, 1.05, 1.2}) {
            const auto twice = scale_to_nominal_load(scale_to_nominal_load(e, a), b);
            CHECK(std::abs(nominal_load(twice) - b) <= 1e-12);
            CHECK(twice.lambda() == Approx(scale_to_nominal_load(e, b).lambda()).epsilon(1e-15));
        }
    }
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(SystemInstance(0.0, {{1, 1, 1}}), ValidationError);
    CHECK_THROWS_AS(SystemInstance(1.0, {}), ValidationError);
    CHECK_THROWS_AS(SystemInstance(1.0, {{2, 1, 1}}), ValidationError);
    CHECK_THROWS_AS(SystemInstance(1.0, {{0, 1, 1}}), ValidationError);
    CHECK_THROWS_AS(SystemInstance(1.0, {{1, 1, -1}}), ValidationError);
    CHECK_THROWS_AS(SystemInstance(1.0, {{1, 1, std::nan("")}}), ValidationError);
    try {
        SystemInstance(1.0, {{1, 1, 1}, {1, 1, 0}});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("queues[1].mu") != std::string::npos);
    }
}

TEST_CASE("state counts") {
    CHECK(joint_state_count(experiment1()) == 2431);
    CHECK(joint_state_count(SystemInstance(1, {{1, 5, 1}})) == 6);
    CHECK(joint_state_count(SystemInstance(190, {{1, 18, 80}, {4, 18, 15}, {10, 18, 5}})) == 6859);
    std::vector<QueueParams> huge(8, QueueParams{1, 1'000'000, 1});
    CHECK(joint_state_count(SystemInstance(1, huge)) == UINT64_MAX);
}

TEST_CASE("parse documents") {
    const auto inst = parse_instance(R"({"lambda": 190, "queues": [
        {"m": 1, "n": 16, "mu": 80}, {"m": 4, "n": 12, "mu": 15}, {"m": 10, "n": 10, "mu": 5}]})");
    CHECK(inst == experiment1());

    const auto rho_form = parse_instance(R"({"rho": 0.9, "queues": [
        {"m": 1, "n": 18, "mu": 80}, {"m": 4, "n": 18, "mu": 15}, {"m": 10, "n": 18, "mu": 5}]})");
    CHECK(rho_form.size() == 3);
    CHECK(rho_form.queue(2).n == 18);
    CHECK(rho_form.queue(1).mu == 15);
    CHECK(rho_form.lambda() == Approx(171).epsilon(1e-15));

    CHECK(parse_instance(serialize_instance(experiment2(1234.5))) == experiment2(1234.5));
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_instance(R"({"lambda": 1, "queues": [{"m": 1, "n": 0, "mu": 1}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_instance(R"({"lambda": 1, "rho": 1, "queues": [{"m": 1, "n": 1, "mu": 1}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_instance(R"({"queues": [{"m": 1, "n": 1, "mu": 1}]})"), ValidationError);
    CHECK_THROWS_AS(parse_instance(R"({"lambda": 1, "queues": [{"m": 1.5, "n": 2, "mu": 1}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_instance(R"({"lambda": 1, "queues": [{"m": 1, "n": 1, "mu": 1, "c": 2}]})"),
                    ValidationError);
    try {
        parse_instance("{\n\"lambda\": 1,\n\"queues\": [\n{\"m\": 1,, }\n]}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
    CHECK_THROWS_AS(load_instance("/nonexistent/instance.json"), ValidationError);
}

TEST_CASE("load from file") {
    const auto path = std::filesystem::temp_directory_path() / "lossroute_instance_test.json";
    {
        std::ofstream(path) << serialize_instance(experiment1(133));
    }
    CHECK(load_instance(path) == experiment1(133));
    std::filesystem::remove(path);
}
