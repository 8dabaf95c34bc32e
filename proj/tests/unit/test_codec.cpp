#include <gtest/gtest.h>

#include "warden/codec.hpp"
#include "warden/error.hpp"

using namespace warden;

TEST(Codec, FormatsRow) {
  EXPECT_EQ(format_csv_row({15624510, Gender::Male, 19, 19000, 0}), "15624510,Male,19,19000,0");
}

TEST(Codec, ParsesRow) {
  CustomerRecord r = parse_csv_row("15603246,Female,27,57000,0", 1);
  EXPECT_EQ(r, (CustomerRecord{15603246, Gender::Female, 27, 57000, 0}));
}

TEST(Codec, RowErrorsCarryRowNumber) {
  for (auto line : {"1,Male,19", "1,Other,19,1000,0", "x,Male,19,1000,0", "1,Male,19,1000,3", "1,Male,19,1000,0,9",
                    "1,Male,19.5,1000,0", "1,Male,19,-5,0"}) {
    try {
      parse_csv_row(line, 7);
      ADD_FAILURE() << "accepted " << line;
    } catch (const DecodeError& e) {
      EXPECT_EQ(std::string(e.what()).rfind("row 7", 0), 0u) << e.what();
    }
  }
}

TEST(Codec, SplitLinesAcceptsCrlfAndMissingFinalNewline) {
  auto lines = split_lines("a\r\nb\nc");
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[1], "b");
  EXPECT_EQ(lines[2], "c");
  EXPECT_EQ(split_lines("a\n").size(), 1u);
}

TEST(Codec, HeaderMustMatchExactly) {
  EXPECT_THROW(parse_csv_records("User ID,Gender,Age,Salary,Purchased\n"), DecodeError);
  EXPECT_THROW(parse_csv_records(""), DecodeError);
  EXPECT_TRUE(parse_csv_records("User ID,Gender,Age,EstimatedSalary,Purchased\n").empty());
}

TEST(Codec, JsonKeysAndRoundTrip) {
  CustomerRecord r{15624510, Gender::Male, 19, 19000, 0};
  EXPECT_EQ(to_json(r).dump(),
            R"({"user_id":15624510,"gender":"Male","age":19,"estimated_salary":19000,"purchased":0})");
  EXPECT_EQ(record_from_json(nlohmann::json::parse(to_json(r).dump())), r);
}

TEST(Codec, JsonDecodeValidates) {
  auto j = nlohmann::json::parse(R"({"user_id":1,"gender":"Male","age":200,"estimated_salary":1,"purchased":0})");
  EXPECT_THROW(record_from_json(j), Error);
}
