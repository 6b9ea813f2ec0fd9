#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>

#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/synthdata.hpp"
#include "testutil.hpp"

using namespace dfl;

namespace {

void put_u32_be(std::ofstream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(buf), 4);
}

// Hand-built two-image IDX fixture: image 0 is all zeros except pixel (0,0)
// = 255; image 1 is all 255 except pixel (27,27) = 0.
void write_fixture(const std::string& images_path, const std::string& labels_path,
                   std::uint32_t images_magic = 0x00000803, std::uint32_t labels_magic = 0x00000801,
                   int image_count = 2, int label_count = 2, bool truncate_images = false) {
    std::ofstream images(images_path, std::ios::binary);
    put_u32_be(images, images_magic);
    put_u32_be(images, static_cast<std::uint32_t>(image_count));
    put_u32_be(images, 28);
    put_u32_be(images, 28);
    std::vector<unsigned char> pix(static_cast<std::size_t>(image_count) * 784, 0);
    if (image_count >= 1) pix[0] = 255;
    if (image_count >= 2) {
        for (int i = 784; i < 1568; ++i) pix[static_cast<std::size_t>(i)] = 255;
        pix[1567] = 0;
    }
    if (truncate_images) pix.resize(pix.size() / 2);
    images.write(reinterpret_cast<char*>(pix.data()), static_cast<std::streamsize>(pix.size()));
    images.close();

    std::ofstream labels(labels_path, std::ios::binary);
    put_u32_be(labels, labels_magic);
    put_u32_be(labels, static_cast<std::uint32_t>(label_count));
    for (int i = 0; i < label_count; ++i) labels.put(static_cast<char>(i % 10));
}

struct AssignmentStats {
    std::set<std::int32_t> all_indices;
    int corrupt_nodes = 0;
    std::size_t corrupt_total = 0;
};

AssignmentStats stats_of(const FederatedAssignment& a) {
    AssignmentStats stats;
    for (const auto& node : a.per_node) {
        for (auto idx : node.train_indices) {
            CHECK(stats.all_indices.insert(idx).second); // global partition
        }
        for (auto idx : node.val_indices) {
            CHECK(stats.all_indices.insert(idx).second);
        }
        if (node.holds_corrupt()) stats.corrupt_nodes += 1;
        stats.corrupt_total += node.corrupt_indices.size();
    }
    return stats;
}

} // namespace

TEST_CASE("idx fixture decodes exact pixel values") {
    const auto dir = testutil::temp_dir("idx");
    const auto img = (dir / "img").string();
    const auto lbl = (dir / "lbl").string();
    write_fixture(img, lbl);

    const LabeledDataset ds = load_idx(img, lbl);
    REQUIRE(ds.count() == 2);
    CHECK(ds.image(0)[0] == doctest::Approx(1.0));
    CHECK(ds.image(0)[1] == doctest::Approx(0.0));
    CHECK(ds.image(1)[0] == doctest::Approx(1.0));
    CHECK(ds.image(1)[783] == doctest::Approx(0.0));
    CHECK(ds.labels[0] == 0);
    CHECK(ds.labels[1] == 1);
}

TEST_CASE("idx loader rejects bad magic numbers") {
    const auto dir = testutil::temp_dir("idx_magic");
    const auto img = (dir / "img").string();
    const auto lbl = (dir / "lbl").string();

    write_fixture(img, lbl, 0x00000801); // wrong images magic
    CHECK_THROWS_WITH_AS(load_idx(img, lbl), doctest::Contains("magic"), Error);

    write_fixture(img, lbl, 0x00000803, 0x00000803); // wrong labels magic
    CHECK_THROWS_WITH_AS(load_idx(img, lbl), doctest::Contains("magic"), Error);
}

TEST_CASE("idx loader detects truncation and count mismatch") {
    const auto dir = testutil::temp_dir("idx_trunc");
    const auto img = (dir / "img").string();
    const auto lbl = (dir / "lbl").string();

    write_fixture(img, lbl, 0x00000803, 0x00000801, 2, 2, /*truncate_images=*/true);
    CHECK_THROWS_WITH_AS(load_idx(img, lbl), doctest::Contains("truncated"), Error);

    write_fixture(img, lbl, 0x00000803, 0x00000801, 2, 3);
    CHECK_THROWS_WITH_AS(load_idx(img, lbl), doctest::Contains("mismatch"), Error);
}

// The official-file checks (60,000 train / 10,000 test) run when the
// environment provides the real dataset directory.
TEST_CASE("real mnist counts when DFLSIM_MNIST_DIR is set") {
    const char* dir = std::getenv("DFLSIM_MNIST_DIR");
    if (dir == nullptr) return;
    const std::string base(dir);
    const LabeledDataset train =
        load_idx(base + "/train-images-idx3-ubyte", base + "/train-labels-idx1-ubyte");
    CHECK(train.count() == 60000);
    const LabeledDataset test =
        load_idx(base + "/t10k-images-idx3-ubyte", base + "/t10k-labels-idx1-ubyte");
    CHECK(test.count() == 10000);
}

TEST_CASE("idx round trip through write_idx") {
    const auto dir = testutil::temp_dir("idx_rt");
    const LabeledDataset ds = make_synth_digits(32, 5, SourceTag::train);
    write_idx(ds, (dir / "img").string(), (dir / "lbl").string());
    const LabeledDataset back = load_idx((dir / "img").string(), (dir / "lbl").string());
    REQUIRE(back.count() == ds.count());
    CHECK(back.labels == ds.labels);
    for (int i = 0; i < ds.count(); ++i)
        for (int px = 0; px < kImagePixels; ++px)
            CHECK(back.image(i)[static_cast<std::size_t>(px)] ==
                  doctest::Approx(ds.image(i)[static_cast<std::size_t>(px)]).epsilon(0.5 / 255.0));
}

TEST_CASE("iid non-target allocation splits each class evenly") {
    // 100 of class 0 over 50 nodes -> exactly 2 each; 101 of class 1 -> one
    // node gets 3.
    std::vector<int> counts(10, 0);
    counts[0] = 100;
    counts[1] = 101;
    counts[9] = 60;
    const LabeledDataset ds = testutil::make_dataset_with_counts(counts);
    Rng rng(3);
    const FederatedAssignment a = assign_iid_nontarget(ds, 50, 9, rng);

    std::vector<int> class0(50, 0), class1(50, 0), class9(50, 0);
    for (int node = 0; node < 50; ++node)
        for (auto idx : a.per_node[static_cast<std::size_t>(node)].train_indices) {
            if (ds.labels[static_cast<std::size_t>(idx)] == 0) class0[static_cast<std::size_t>(node)] += 1;
            if (ds.labels[static_cast<std::size_t>(idx)] == 1) class1[static_cast<std::size_t>(node)] += 1;
            if (ds.labels[static_cast<std::size_t>(idx)] == 9) class9[static_cast<std::size_t>(node)] += 1;
        }
    int threes = 0;
    for (int node = 0; node < 50; ++node) {
        CHECK(class0[static_cast<std::size_t>(node)] == 2);
        CHECK((class1[static_cast<std::size_t>(node)] == 2 || class1[static_cast<std::size_t>(node)] == 3));
        threes += class1[static_cast<std::size_t>(node)] == 3 ? 1 : 0;
        CHECK(class9[static_cast<std::size_t>(node)] == 0); // target class untouched
    }
    CHECK(threes == 1);
}

TEST_CASE("non-target class totals are conserved") {
    const LabeledDataset ds = make_synth_digits(2000, 11, SourceTag::train);
    Rng rng(5);
    const FederatedAssignment a = assign_iid_nontarget(ds, 16, 9, rng);
    const auto counts = ds.class_counts();
    std::vector<int> assigned(10, 0);
    for (const auto& node : a.per_node)
        for (auto idx : node.train_indices) assigned[ds.labels[static_cast<std::size_t>(idx)]] += 1;
    for (int cls = 0; cls < 9; ++cls) CHECK(assigned[static_cast<std::size_t>(cls)] == counts[static_cast<std::size_t>(cls)]);
    CHECK(assigned[9] == 0);
}

TEST_CASE("balanced scheme flags exactly ceil(pN) top-ranked nodes") {
    std::vector<int> counts(10, 40);
    counts[9] = 200;
    const LabeledDataset ds = testutil::make_dataset_with_counts(counts);
    CentralityRanking ranking;
    for (int i = 49; i >= 0; --i) ranking.ordered.push_back(i); // 49 is most central

    for (double p : {0.0, 0.3, 0.9, 1.0}) {
        Rng rng(8);
        FederatedAssignment a = assign_iid_nontarget(ds, 50, 9, rng);
        Rng trng(9);
        assign_target_balanced(ds, a, ranking, p, trng);
        const auto stats = stats_of(a);
        const int expected = static_cast<int>(std::ceil(p * 50));
        CHECK(stats.corrupt_nodes == expected);
        CHECK(stats.all_indices.size() == static_cast<std::size_t>(ds.count()));
        // Flags sit on the highest-ranked nodes only.
        for (int rank = 0; rank < 50; ++rank) {
            const int node = ranking.ordered[static_cast<std::size_t>(rank)];
            CHECK(a.per_node[static_cast<std::size_t>(node)].holds_corrupt() == (rank < expected));
        }
    }
}

TEST_CASE("balanced p=0.9 with 50 nodes flags 45") {
    std::vector<int> counts(10, 20);
    counts[9] = 500;
    const LabeledDataset ds = testutil::make_dataset_with_counts(counts);
    CentralityRanking ranking;
    for (int i = 0; i < 50; ++i) ranking.ordered.push_back(i);
    Rng rng(1);
    FederatedAssignment a = assign_iid_nontarget(ds, 50, 9, rng);
    Rng trng(2);
    assign_target_balanced(ds, a, ranking, 0.9, trng);
    CHECK(stats_of(a).corrupt_nodes == 45);
}

TEST_CASE("unbalanced scheme concentrates all corruption on the top node") {
    std::vector<int> counts(10, 30);
    counts[9] = 333;
    const LabeledDataset ds = testutil::make_dataset_with_counts(counts);
    CentralityRanking ranking;
    for (int i = 0; i < 20; ++i) ranking.ordered.push_back((i + 7) % 20);

    for (double p : {0.0, 0.5, 0.9}) {
        Rng rng(4);
        FederatedAssignment a = assign_iid_nontarget(ds, 20, 9, rng);
        Rng trng(6);
        assign_target_unbalanced(ds, a, ranking, p, trng);
        const int hub = ranking.ordered.front();
        const auto& hub_node = a.per_node[static_cast<std::size_t>(hub)];
        const auto expected_hub = static_cast<std::size_t>(std::ceil(p * 333));
        CHECK(hub_node.corrupt_indices.size() == expected_hub);

        int hub_target_count = 0;
        for (auto idx : hub_node.train_indices)
            if (ds.labels[static_cast<std::size_t>(idx)] == 9) hub_target_count += 1;
        CHECK(hub_target_count == static_cast<int>(expected_hub)); // no clean target samples on the hub

        const auto stats = stats_of(a);
        CHECK(stats.corrupt_nodes == (p == 0.0 ? 0 : 1));
        CHECK(stats.corrupt_total == expected_hub);
        CHECK(stats.all_indices.size() == static_cast<std::size_t>(ds.count())); // nothing lost
    }
}

TEST_CASE("validation split is stratified, disjoint and deterministic") {
    std::vector<int> counts(10, 0);
    counts[0] = 60;
    counts[1] = 40;
    const LabeledDataset ds = testutil::make_dataset_with_counts(counts);
    Rng rng(2);
    FederatedAssignment a = assign_iid_nontarget(ds, 1, 9, rng);
    REQUIRE(a.per_node[0].train_indices.size() == 100);

    FederatedAssignment b = a;
    Rng sa(77), sb(77);
    split_validation(a, ds, 0.2, sa);
    split_validation(b, ds, 0.2, sb);
    CHECK(a.per_node[0].train_indices == b.per_node[0].train_indices);
    CHECK(a.per_node[0].val_indices == b.per_node[0].val_indices);

    CHECK(a.per_node[0].train_indices.size() == 80);
    CHECK(a.per_node[0].val_indices.size() == 20);

    std::set<std::int32_t> train(a.per_node[0].train_indices.begin(), a.per_node[0].train_indices.end());
    for (auto idx : a.per_node[0].val_indices) CHECK(train.count(idx) == 0);

    int val_class0 = 0;
    for (auto idx : a.per_node[0].val_indices)
        if (ds.labels[static_cast<std::size_t>(idx)] == 0) val_class0 += 1;
    CHECK(val_class0 == 12); // stratified: 20% of 60
}

TEST_CASE("classes with fewer than two samples stay in train") {
    const LabeledDataset ds = testutil::make_dataset({0, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    Rng rng(3);
    FederatedAssignment a = assign_iid_nontarget(ds, 1, 9, rng);
    Rng srng(4);
    split_validation(a, ds, 0.2, srng);
    bool class0_in_train = false;
    for (auto idx : a.per_node[0].train_indices)
        if (ds.labels[static_cast<std::size_t>(idx)] == 0) class0_in_train = true;
    CHECK(class0_in_train);
}

TEST_CASE("corrupt flags survive the validation split on either side") {
    std::vector<int> counts(10, 10);
    counts[9] = 50;
    const LabeledDataset ds = testutil::make_dataset_with_counts(counts);
    CentralityRanking ranking;
    for (int i = 0; i < 5; ++i) ranking.ordered.push_back(i);
    Rng rng(4);
    FederatedAssignment a = assign_iid_nontarget(ds, 5, 9, rng);
    Rng trng(5);
    assign_target_balanced(ds, a, ranking, 1.0, trng);
    const auto stats_before = stats_of(a);
    Rng srng(6);
    split_validation(a, ds, 0.2, srng);
    std::size_t corrupt_after = 0;
    for (const auto& node : a.per_node) corrupt_after += node.corrupt_indices.size();
    CHECK(corrupt_after == stats_before.corrupt_total);
}

TEST_CASE("manifest lists every index once with its split") {
    const LabeledDataset ds = testutil::make_dataset({0, 1, 9, 9});
    Rng rng(1);
    FederatedAssignment a = assign_iid_nontarget(ds, 2, 9, rng);
    CentralityRanking ranking;
    ranking.ordered = {0, 1};
    Rng trng(2);
    assign_target_balanced(ds, a, ranking, 1.0, trng);
    const std::string manifest = assignment_manifest_csv(a);
    CHECK(manifest.find("node_id,index,split,corrupt_flag\n") == 0);
    CHECK(std::count(manifest.begin(), manifest.end(), '\n') == 5); // header + 4 samples
}

TEST_CASE("stratified subset keeps per-class proportions") {
    std::vector<int> counts(10, 100);
    counts[4] = 200;
    const LabeledDataset ds = testutil::make_dataset_with_counts(counts);
    Rng rng(12);
    const LabeledDataset sub = stratified_subset(ds, 0.25, rng);
    const auto sub_counts = sub.class_counts();
    CHECK(sub_counts[4] == 50);
    for (int cls = 0; cls < 10; ++cls)
        if (cls != 4) CHECK(sub_counts[static_cast<std::size_t>(cls)] == 25);
}
