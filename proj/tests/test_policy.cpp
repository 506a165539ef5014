#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "provwatch/policy.hpp"

using namespace provwatch;

TEST_CASE("default policy loads the full rule tables") {
    Policy p = Policy::built_in();
    CHECK(p.transfer_rules.size() == 20);
    CHECK(p.judgment_rules.size() == 7);
    CHECK(p.phf == LabelSet{Label::PS2, Label::PS3, Label::PS5, Label::PB1, Label::PB2, Label::PB5});
    CHECK(p.init_rules.size() == 8);

    // init-labeled files are the forensic entry-point classes
    CHECK(p.init_labels() ==
          LabelSet{Label::FU1, Label::FU3, Label::FH1, Label::FH2, Label::FH3, Label::FH4});
}

TEST_CASE("policy rejects bad directions and unknown names") {
    CHECK_THROWS_AS(Policy::parse("[transfer]\nPS1 E1 FU2 X\n"), PolicyError);
    CHECK_THROWS_AS(Policy::parse("[transfer]\nPS9 E1 FU2 D\n"), PolicyError);
    CHECK_THROWS_AS(Policy::parse("[transfer]\nPS1 E77 FU2 D\n"), PolicyError);
    CHECK_THROWS_AS(Policy::parse("[judgment]\nX : Threat : PS1&&\n"), PolicyError);
    CHECK_THROWS_AS(Policy::parse("[judgment]\nX : Critical : PS1\n"), PolicyError);
    CHECK_THROWS_AS(Policy::parse("[init]\nfile [ FU1\n"), PolicyError);
    // judgment conditions evaluate process label sets
    CHECK_THROWS_AS(Policy::parse("[judgment]\nX : Threat : FU2\n"), PolicyError);
}

TEST_CASE("custom PHF entries extend the set") {
    Policy p = Policy::parse("[phf]\nPS1 PB8\n");
    CHECK(p.phf == LabelSet{Label::PS1, Label::PB8});
}

TEST_CASE("policies load from disk") {
    auto path = (std::filesystem::temp_directory_path() / "pw_policy_test.policy").string();
    {
        std::ofstream out(path);
        out << "[transfer]\nPS1 E1 FU2 D\n[judgment]\nPing : Threat : PS1\n";
    }
    Policy p = Policy::load_file(path);
    CHECK(p.transfer_rules.size() == 1);
    CHECK(p.judgment_rules.size() == 1);
    CHECK(p.judgment_rules[0].alert_name == "Ping");
    CHECK_THROWS_AS(Policy::load_file("/no/such.policy"), PolicyError);
    std::filesystem::remove(path);
}

TEST_CASE("condition expressions evaluate boolean structure") {
    auto c = Condition::parse("((PS4&PB4)|(PB1&PB5)|(PS5&PB5))&PB8");
    CHECK(c.eval(LabelSet{Label::PS4, Label::PB4, Label::PB8}));
    CHECK(c.eval(LabelSet{Label::PB1, Label::PB5, Label::PB8}));
    CHECK(c.eval(LabelSet{Label::PS5, Label::PB5, Label::PB8, Label::PS1}));
    CHECK_FALSE(c.eval(LabelSet{Label::PS4, Label::PB4}));          // no PB8
    CHECK_FALSE(c.eval(LabelSet{Label::PB8}));                      // no pair
    CHECK_FALSE(c.eval(LabelSet{Label::PS4, Label::PB5, Label::PB8}));  // mixed pair

    auto simple = Condition::parse("PB6|PB7|PS6|PS7");
    CHECK(simple.eval(LabelSet{Label::PS6}));
    CHECK_FALSE(simple.eval(LabelSet{Label::PS1, Label::PS3}));

    CHECK(c.referenced() ==
          LabelSet{Label::PS4, Label::PB4, Label::PB1, Label::PB5, Label::PS5, Label::PB8});
}

TEST_CASE("label name round trip") {
    for (uint8_t i = 0; i < kLabelCount; ++i) {
        Label l = static_cast<Label>(i);
        auto parsed = label_from_name(label_name(l));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == l);
    }
    CHECK_FALSE(label_from_name("PX1").has_value());
}

TEST_CASE("status labels are exactly PS1..PS7") {
    CHECK(is_status_label(Label::PS1));
    CHECK(is_status_label(Label::PS7));
    CHECK_FALSE(is_status_label(Label::PB1));
    CHECK(is_behavior_label(Label::PB8));
    CHECK_FALSE(is_process_label(Label::FU1));
    CHECK(is_file_label(Label::FH5));
    CHECK(LabelSet::status_mask().count() == 7);
}
