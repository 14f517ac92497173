#include <doctest.h>

#include <filesystem>

#include "stylo/common.hpp"
#include "stylo/io.hpp"
#include "stylo/rng.hpp"

using namespace stylo;

TEST_CASE("fnv1a64 reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("utf8 length counts scalar values") {
    CHECK(utf8_length("") == 0);
    CHECK(utf8_length("abc") == 3);
    CHECK(utf8_length("caf\xc3\xa9") == 4);           // café
    CHECK(utf8_length("\xf0\x9f\x98\x80 ok") == 4);   // emoji + " ok"
    CHECK(utf8_length("\xc3") == 1);                   // truncated sequence counts once
    const auto cps = utf8_decode("a\xe2\x82\xac");
    REQUIRE(cps.size() == 2);
    CHECK(cps[1] == U'€');
    std::string s;
    utf8_append(s, U'€');
    CHECK(s == "\xe2\x82\xac");
}

TEST_CASE("summary statistics") {
    std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    CHECK(*mean_of(xs) == doctest::Approx(2.5));
    CHECK(*sample_sd(xs) == doctest::Approx(1.2909944487358056));
    CHECK_FALSE(mean_of(std::vector<double>{}).has_value());
    CHECK_FALSE(sample_sd(std::vector<double>{1.0}).has_value());
}

TEST_CASE("linear-interpolation percentile") {
    // h = (n-1)p = 3 * 0.975 = 2.925 -> 3 + 0.925 * 97
    CHECK(percentile_linear({1, 2, 3, 100}, 0.975) == doctest::Approx(92.725).epsilon(1e-12));
    CHECK(percentile_linear({5, 1, 3}, 0.5) == 3.0);
    CHECK(percentile_linear({5, 1, 3}, 0.0) == 1.0);
    CHECK(percentile_linear({5, 1, 3}, 1.0) == 5.0);
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.62, 1e-300, 123456789.125}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("rng is reproducible and in range") {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        CHECK(r.index(7) < 7u);
    }
    const auto s = Rng(3).sample_without_replacement(10, 4);
    CHECK(s.size() == 4);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
    CHECK(Rng(3).sample_without_replacement(10, 4) == s);

    Rng g(11);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = g.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("csv escaping and splitting round-trip") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    const auto back = csv_split(csv_escape("a,b") + "," + csv_escape("say \"hi\"") + ",,x");
    REQUIRE(back.size() == 4);
    CHECK(back[0] == "a,b");
    CHECK(back[1] == "say \"hi\"");
    CHECK(back[2].empty());
    CHECK(back[3] == "x");
}

TEST_CASE("csv table read and cells") {
    const auto dir = std::filesystem::temp_directory_path() / "stylo_test_common";
    std::filesystem::create_directories(dir);
    write_file(dir / "t.csv", "id,v\nx,1.5\ny,\n");
    const auto t = read_csv(dir / "t.csv");
    CHECK(t.column("v") == 1);
    CHECK_THROWS_AS(t.column("nope"), DataError);
    REQUIRE(t.rows.size() == 2);
    CHECK(*parse_cell(t.rows[0][1]) == 1.5);
    CHECK_FALSE(parse_cell(t.rows[1][1]).has_value());
    CHECK(cell(std::nullopt).empty());
    CHECK(cell(0.25) == "0.25");
    std::filesystem::remove_all(dir);
}
