#include <doctest.h>

#include <random>

#include "osforma/resource.hpp"

using namespace osforma;

TEST_CASE("words start undefined and refuse to be read") {
    Word w;
    CHECK(w.is_undef());
    CHECK_THROWS_AS((void)w.value(), ModelError);
    try {
        (void)w.value();
    } catch (const ModelError& e) {
        CHECK(e.code() == Errc::undefined_read);
    }
    CHECK(Word(5).value() == 5);
    CHECK_FALSE(Word(0).is_undef());
}

TEST_CASE("word addition wraps in two's complement") {
    CHECK(wrap_add(3, 4) == 7);
    CHECK(wrap_add(INT64_MAX, 1) == INT64_MIN);
    CHECK(wrap_add(INT64_MIN, -1) == INT64_MAX);
    CHECK(wrap_add(-2, 5) == 3);
}

TEST_CASE("zero_words and undef_words") {
    auto z = zero_words(3);
    REQUIRE(z.size() == 3);
    for (const Word& w : z)
        CHECK(w.value() == 0);
    auto u = undef_words(2);
    CHECK(u[0].is_undef());
    CHECK(u[1].is_undef());
}

TEST_CASE("fresh resources hold undefined words until reset") {
    Resource r("mem", 4, {"set"});
    CHECK(r.id() == "mem");
    CHECK(r.size() == 4);
    CHECK(r.tick() == 0);
    CHECK(r.read(1).is_undef());
    r.reset(zero_words(4));
    CHECK(r.read(1).value() == 0);
    CHECK(r.tick() == 1);
}

TEST_CASE("element addressing is 1-based and bounded") {
    Resource r("mem", 2, {});
    CHECK_THROWS_AS((void)r.read(0), ModelError);
    CHECK_THROWS_AS((void)r.read(3), ModelError);
    try {
        (void)r.read(3);
    } catch (const ModelError& e) {
        CHECK(e.code() == Errc::address_out_of_range);
    }
}

TEST_CASE("only registered functions may transform a resource") {
    Resource r("mem", 2, {"set"});
    r.reset(zero_words(2));
    r.apply(transforms::store_word("set", 1, Word(9)));
    CHECK(r.read(1).value() == 9);
    CHECK_THROWS_AS(r.apply(transforms::add_words(1, 2)), ModelError);
    try {
        r.apply(transforms::add_words(1, 2));
    } catch (const ModelError& e) {
        CHECK(e.code() == Errc::unregistered_function);
    }
}

TEST_CASE("reset bypasses registration but not shape") {
    Resource r("raw", 2, {});
    r.reset(zero_words(2)); // no functions registered at all
    CHECK(r.read(2).value() == 0);
    CHECK_THROWS_AS(r.reset(zero_words(3)), ModelError);
    try {
        r.reset(zero_words(3));
    } catch (const ModelError& e) {
        CHECK(e.code() == Errc::shape_mismatch);
    }
}

TEST_CASE("transforms bump the resource tick exactly once per apply") {
    Resource r("mem", 1, {"set"});
    r.reset(zero_words(1));
    auto t0 = r.tick();
    r.apply(transforms::store_word("set", 1, Word(1)));
    CHECK(r.tick() == t0 + 1);
    r.apply(transforms::store_word("set", 1, Word(2)));
    CHECK(r.tick() == t0 + 2);
}

TEST_CASE("add transform reads before it writes") {
    Resource r("mem", 2, {"add"});
    // both operands undefined: the transform itself must refuse
    CHECK_THROWS_AS(r.apply(transforms::add_words(1, 2)), ModelError);
    r.reset(zero_words(2));
    r.apply(transforms::add_words(1, 2));
    CHECK(r.read(1).value() == 0);
}

TEST_CASE("store and add against an integer-vector oracle") {
    std::mt19937_64 rng(20210915);
    for (int round = 0; round < 50; ++round) {
        std::size_t n = 1 + rng() % 6;
        Resource r("mem", n, {"set", "add"});
        r.reset(zero_words(n));
        std::vector<std::int64_t> oracle(n, 0);
        for (int op = 0; op < 40; ++op) {
            std::uint32_t a = 1 + static_cast<std::uint32_t>(rng() % n);
            std::uint32_t b = 1 + static_cast<std::uint32_t>(rng() % n);
            if (rng() % 2 == 0) {
                auto v = static_cast<std::int64_t>(rng() % 1000) - 500;
                r.apply(transforms::store_word("set", a, Word(v)));
                oracle[a - 1] = v;
            } else {
                r.apply(transforms::add_words(a, b));
                oracle[a - 1] = static_cast<std::int64_t>(
                    static_cast<std::uint64_t>(oracle[a - 1]) +
                    static_cast<std::uint64_t>(oracle[b - 1]));
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            CHECK(r.read(static_cast<std::uint32_t>(i) + 1).value() == oracle[i]);
    }
}

TEST_CASE("the resource table rejects duplicates and bad sizes") {
    ResourceTable tab;
    tab.make_resource("a", 2, {"set"});
    CHECK_THROWS_AS(tab.make_resource("a", 1, {}), ModelError);
    CHECK_THROWS_AS(tab.make_resource("b", -1, {}), ModelError);
    CHECK_THROWS_AS(tab.make_resource("", 1, {}), ModelError);
    try {
        tab.make_resource("b", -1, {});
    } catch (const ModelError& e) {
        CHECK(e.code() == Errc::invalid_size);
    }
    CHECK(tab.contains("a"));
    CHECK_FALSE(tab.contains("b"));
}

TEST_CASE("table lookups name the missing resource") {
    ResourceTable tab;
    CHECK_THROWS_AS((void)tab.get("ghost"), ModelError);
    try {
        (void)tab.get("ghost");
    } catch (const ModelError& e) {
        CHECK(e.code() == Errc::unknown_resource);
        CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
}

TEST_CASE("read_element and apply_transform go through the table") {
    ResourceTable tab;
    tab.make_resource("m", 2, {"set"});
    tab.get("m").reset(zero_words(2));
    tab.apply_transform("m", transforms::store_word("set", 2, Word(11)));
    CHECK(tab.read_element("m", 2).value() == 11);
    CHECK(tab.read_element("m", 1).value() == 0);
}

TEST_CASE("size-0 resources are legal and carry no words") {
    ResourceTable tab;
    Resource& cpu = tab.make_resource("cpu0", 0, {});
    CHECK(cpu.size() == 0);
    CHECK(cpu.snapshot().values.empty());
    CHECK_THROWS_AS((void)cpu.read(1), ModelError);
}

TEST_CASE("snapshots carry the tick and the words") {
    Resource r("m", 1, {"set"});
    r.reset({Word(7)});
    StateVector s = r.snapshot();
    CHECK(s.tick == 1);
    CHECK(s.values.size() == 1);
    CHECK(s.at(1).value() == 7);
}
