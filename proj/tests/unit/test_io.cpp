#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sconv/io.hpp"

using namespace sconv;

TEST_CASE("field documents round-trip") {
    for (int d : {2, 3}) {
        auto g = SphereGrid::make(d, 8);
        auto f = SphereField::from_function(g, [](const Vec3& w) { return cplx(w[0], 1.0 - w[1]); });
        json j = field_to_json(f);
        CHECK(j["dim"] == d);
        CHECK(j["values_re"].size() == g->size());
        SphereField back = field_from_json(json::parse(j.dump()));
        CHECK(back.values() == f.values());
    }
}

TEST_CASE("field documents are validated") {
    auto g = SphereGrid::make(3, 8);
    json j = field_to_json(SphereField::constant(g, 1.0));
    json bad = j;
    bad["weights"][3] = 0.5;
    CHECK_THROWS_AS(field_from_json(bad), ValidationError);
    bad = j;
    bad["values_re"].erase(std::size_t(0));
    CHECK_THROWS_AS(field_from_json(bad), ValidationError);
    bad = j;
    bad["values_im"][0] = "x";
    CHECK_THROWS_AS(field_from_json(bad), ValidationError);
    bad = j;
    bad.erase("nodes");
    CHECK_THROWS_AS(field_from_json(bad), ValidationError);
    bad = j;
    bad["dim"] = 4;
    CHECK_THROWS_AS(field_from_json(bad), ValidationError);
}

TEST_CASE("named constructors") {
    auto g = SphereGrid::make(3, 10);
    auto f = make_named_field(g, "2*const+0.5*linear:3");
    Vec3 p{0.0, 0.6, 0.8};
    CHECK(std::abs(f(p) - cplx(2.4)) < 1e-13);
    auto big = make_named_field(g, "1e+3*const");
    CHECK(big[0] == cplx(1000.0));
    auto y = make_named_field(g, "harmonic:1,0");
    CHECK(std::abs(y(p) - cplx(std::sqrt(3.0 / (4.0 * M_PI)) * 0.8)) < 1e-13);
    auto hemi = make_named_field(g, "hemisphere");
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(hemi[i] == cplx(g->node(i)[2] > 0.0 ? 1.0 : 0.0));
    auto bump = make_named_field(g, "lipschitz-bump:0,2");
    CHECK(bump[0].real() >= 1.0);
    auto g2 = SphereGrid::make(2, 8);
    auto e = make_named_field(g2, "harmonic:2");
    CHECK(std::abs(e(Vec3{0.0, 1.0, 0.0}) - cplx(-1.0)) < 1e-13);

    CHECK_THROWS_AS(make_named_field(g, ""), ValidationError);
    CHECK_THROWS_AS(make_named_field(g, "wave:3"), ValidationError);
    CHECK_THROWS_AS(make_named_field(g, "linear:4"), ValidationError);
    CHECK_THROWS_AS(make_named_field(g, "harmonic:40,0"), ValidationError);
    CHECK_THROWS_AS(make_named_field(g, "const+"), ValidationError);
    CHECK_THROWS_AS(make_named_field(g, "x*const"), ValidationError);
}

TEST_CASE("fields persist to disk") {
    auto g = SphereGrid::make(3, 8);
    auto f = make_named_field(g, "const+linear:1");
    auto path = (std::filesystem::temp_directory_path() / "sconv_io_test.json").string();
    save_field(f, path);
    CHECK(load_field(path).values() == f.values());
    auto via_file = make_named_field(g, "file:" + path);
    CHECK(via_file.values() == f.values());
    CHECK_THROWS_AS(make_named_field(SphereGrid::make(3, 10), "file:" + path), ValidationError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_field(path), ValidationError);
}
