#include <doctest.h>

#include "sigmani/io.hpp"
#include "sigmani/rng.hpp"

#include <cstdio>

using namespace sigmani;

TEST_CASE("tensor json roundtrip") {
    Rng rng(1, 1);
    TruncatedTensor t(3, 3);
    for (auto& v : t.raw()) v = rng.next_normal();
    const std::string path = "/tmp/sigmani_test_tensor.json";
    io::write_tensor_json(t, path);
    auto u = io::read_tensor_json(path);
    CHECK(u.ambient_dim() == 3);
    CHECK(u.max_level() == 3);
    for (std::size_t i = 0; i < t.raw().size(); ++i) CHECK(t.raw()[i] == u.raw()[i]);
    std::remove(path.c_str());
}

TEST_CASE("path csv roundtrip") {
    AmbientPath p;
    p.times = {0.0, 0.5, 1.0};
    p.points = {{0, 0}, {0.5, -0.25}, {1, 1}};
    const std::string path = "/tmp/sigmani_test_path.csv";
    io::write_path_csv(p, path);
    auto q = io::read_path_csv(path);
    REQUIRE(q.size() == 3);
    CHECK(q.times[1] == 0.5);
    CHECK(q.points[1][1] == -0.25);
    std::remove(path.c_str());
}
