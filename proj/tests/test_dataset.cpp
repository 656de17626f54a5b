#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "streamprobe/dataset.hpp"
#include "streamprobe/rng.hpp"
#include "support/test_util.hpp"

using namespace streamprobe;

TEST_CASE("concat_layer_features joins layers in order") {
    CHECK(concat_layer_features({{{1, 2}, {3}}}) == std::vector<double>{1, 2, 3});
    CHECK(concat_layer_features({{{5, 6}}}) == std::vector<double>{5, 6});
    CHECK(concat_layer_features({{{0, 0}, {0, 0}}}) == std::vector<double>{0, 0, 0, 0});
    CHECK_THROWS_AS(concat_layer_features(LayerStack{}), invalid_input_error);
    CHECK_THROWS_AS(concat_layer_features({{{1.0, std::nan("")}}}), invalid_input_error);
}

TEST_CASE("empty dataset round-trips with count=0") {
    Dataset ds;
    ds.feature_dim = 4;
    ds.provenance = "empty";
    std::ostringstream out;
    write_dataset(ds, out);
    const std::string bytes = out.str();
    CHECK(bytes.substr(0, 4) == "APDS");
    std::istringstream in(bytes);
    const Dataset back = read_dataset(in);
    CHECK(back.records.empty());
    CHECK(back.feature_dim == 4);
    CHECK(back.provenance == "empty");
}

TEST_CASE("minimal single-record encoding") {
    Dataset ds;
    ds.feature_dim = 1;
    ds.provenance = "min";
    ExchangeRecord rec;
    rec.exchange_id = "rec0";
    rec.label = 1;
    rec.token_count = 1;
    rec.dim = 1;
    rec.features = {1.0};
    ds.records.push_back(rec);

    std::ostringstream out;
    write_dataset(ds, out);
    const std::string bytes = out.str();
    // magic(4) + version(1) + header_len(4) + header + u32 token_count + label + 4 feature bytes
    const std::size_t header_len = static_cast<unsigned char>(bytes[5]) |
                                   (static_cast<unsigned char>(bytes[6]) << 8) |
                                   (static_cast<unsigned char>(bytes[7]) << 16) |
                                   (static_cast<unsigned char>(bytes[8]) << 24);
    CHECK(bytes.size() == 9 + header_len + 4 + 1 + 4);
    const std::size_t rec_off = 9 + header_len;
    CHECK(static_cast<unsigned char>(bytes[rec_off]) == 1);      // token_count LE low byte
    CHECK(static_cast<unsigned char>(bytes[rec_off + 4]) == 1);  // label

    std::istringstream in(bytes);
    const Dataset back = read_dataset(in);
    REQUIRE(back.records.size() == 1);
    CHECK(back.records[0].label == 1);
    CHECK(back.records[0].features == std::vector<double>{1.0});
}

TEST_CASE("write-read round-trip of random datasets preserves every field") {
    Rng rng(1234);
    for (int trial = 0; trial < 8; ++trial) {
        Dataset ds;
        ds.feature_dim = 1 + static_cast<std::size_t>(rng.next_below(6));
        ds.provenance = "trial " + std::to_string(trial) + "\nwith newline";
        const std::size_t n = trial == 0 ? 100 : rng.next_below(20);
        for (std::size_t i = 0; i < n; ++i) {
            ds.records.push_back(testing::random_record_f32(
                rng, 1 + rng.next_below(30), ds.feature_dim,
                static_cast<int>(rng.next_below(2)), "rec" + std::to_string(i)));
        }
        std::ostringstream out;
        write_dataset(ds, out);
        std::istringstream in(out.str());
        const Dataset back = read_dataset(in);

        REQUIRE(back.records.size() == ds.records.size());
        CHECK(back.feature_dim == ds.feature_dim);
        CHECK(back.provenance == ds.provenance);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(back.records[i].exchange_id == ds.records[i].exchange_id);
            CHECK(back.records[i].label == ds.records[i].label);
            CHECK(back.records[i].token_count == ds.records[i].token_count);
            CHECK(back.records[i].features == ds.records[i].features);
        }
    }
}

TEST_CASE("write is deterministic") {
    Rng rng(99);
    Dataset ds;
    ds.feature_dim = 3;
    ds.provenance = "determinism";
    for (std::size_t i = 0; i < 10; ++i) {
        ds.records.push_back(
            testing::random_record_f32(rng, 5, 3, i % 2 == 0 ? 1 : 0, "rec" + std::to_string(i)));
    }
    std::ostringstream a, b;
    write_dataset(ds, a);
    write_dataset(ds, b);
    CHECK(a.str() == b.str());
}

TEST_CASE("read rejects malformed containers") {
    Rng rng(5);
    Dataset ds;
    ds.feature_dim = 2;
    ds.provenance = "bad";
    ds.records.push_back(testing::random_record_f32(rng, 3, 2, 1, "rec0"));
    ds.records.push_back(testing::random_record_f32(rng, 2, 2, 0, "rec1"));
    std::ostringstream out;
    write_dataset(ds, out);
    const std::string good = out.str();

    SECTION("wrong magic") {
        std::string bytes = good;
        bytes[0] = 'X';
        std::istringstream in(bytes);
        CHECK_THROWS_AS(read_dataset(in), format_error);
    }
    SECTION("truncated final record names the record") {
        const std::string bytes = good.substr(0, good.size() - 3);
        std::istringstream in(bytes);
        try {
            read_dataset(in);
            FAIL("expected format_error");
        } catch (const format_error& e) {
            CHECK(std::string(e.what()).find("record 1") != std::string::npos);
        }
    }
    SECTION("NaN feature rejected") {
        // Patch the first feature float of record 0 to a NaN bit pattern.
        std::string bytes = good;
        const std::size_t header_len = static_cast<unsigned char>(bytes[5]) |
                                       (static_cast<unsigned char>(bytes[6]) << 8) |
                                       (static_cast<unsigned char>(bytes[7]) << 16) |
                                       (static_cast<unsigned char>(bytes[8]) << 24);
        const std::size_t feat = 9 + header_len + 5;
        bytes[feat] = '\x01';
        bytes[feat + 1] = '\x00';
        bytes[feat + 2] = '\xc0';
        bytes[feat + 3] = '\x7f';
        std::istringstream in(bytes);
        CHECK_THROWS_AS(read_dataset(in), format_error);
    }
}

TEST_CASE("write rejects invariant violations") {
    Dataset ds;
    ds.feature_dim = 2;
    ExchangeRecord rec;
    rec.exchange_id = "bad";
    rec.label = 2;
    rec.token_count = 1;
    rec.dim = 2;
    rec.features = {0.0, 0.0};
    ds.records.push_back(rec);
    std::ostringstream out;
    CHECK_THROWS_AS(write_dataset(ds, out), invalid_input_error);
}
