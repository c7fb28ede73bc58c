#include <fstream>
#include <sstream>
#include <thread>

// Eigen (via the shared test header) must be seen before httplib's system
// headers.
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include "cyclecast/fred_client.hpp"

namespace cc = cyclecast;
using cc::make_month;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Minimal stand-in for the observations endpoint. Key "good" is accepted,
// "boom" gets a 500, anything else a 400 mentioning api_key as FRED does.
class MockFred : public ::testing::Test {
 protected:
  void SetUp() override {
    body_ = slurp(cc::testing::fixture("fred_unrate_1959Q1.json"));
    server_.Get("/fred/series/observations", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      last_params_ = req.params;
      auto key = req.get_param_value("api_key");
      if (key == "boom") {
        res.status = 500;
        res.set_content("oops", "text/plain");
      } else if (key != "good") {
        res.status = 400;
        res.set_content(R"({"error_code":400,"error_message":"Bad Request.  The value for variable api_key is not registered."})",
                        "application/json");
      } else if (req.get_param_value("series_id") == "EMPTY") {
        res.set_content(R"({"observations":[]})", "application/json");
      } else {
        res.set_content(body_, "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    cache_ = cc::testing::scratch_dir("fred_cache");
  }
  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  cc::FredClient client(bool prefer_cache = false) const {
    cc::FredClientOptions o;
    o.base_url = "http://127.0.0.1:" + std::to_string(port_);
    o.cache_dir = cache_;
    o.prefer_cache = prefer_cache;
    o.timeout_seconds = 5;
    return cc::FredClient(o);
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string body_;
  std::filesystem::path cache_;
  int requests_ = 0;
  httplib::Params last_params_;
};

}  // namespace

TEST_F(MockFred, FetchMatchesCsvFixtureAndCaches) {
  auto s = client().fetch("UNRATE", "good", make_month(1959, 1), make_month(1959, 3));
  auto expected = cc::load_series_csv(cc::testing::fixture("UNRATE_1959Q1.csv"), "UNRATE");
  ASSERT_EQ(s.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s.observations[i].month, expected.observations[i].month);
    EXPECT_EQ(s.observations[i].value, expected.observations[i].value);
  }
  EXPECT_EQ(slurp(cache_ / "UNRATE.json"), body_);
  EXPECT_EQ(last_params_.find("frequency")->second, "m");
  EXPECT_EQ(last_params_.find("file_type")->second, "json");
  EXPECT_EQ(last_params_.find("observation_start")->second, "1959-01-01");

  // Served from the cache without a request, even with no key.
  int before = requests_;
  auto cached = client(true).fetch("UNRATE", "", make_month(1959, 1), make_month(1959, 3));
  EXPECT_EQ(cached.size(), 3u);
  EXPECT_EQ(requests_, before);
}

TEST_F(MockFred, BadKeyIsAuthError) {
  EXPECT_ERROR_KIND(client().fetch("UNRATE", "wrong", make_month(1959, 1), make_month(1959, 3)),
                    cc::ErrorKind::AuthError);
  EXPECT_ERROR_KIND(client().fetch("UNRATE", "", make_month(1959, 1), make_month(1959, 3)), cc::ErrorKind::AuthError);
}

TEST_F(MockFred, ServerErrorIsHttpError) {
  EXPECT_ERROR_KIND(client().fetch("UNRATE", "boom", make_month(1959, 1), make_month(1959, 3)),
                    cc::ErrorKind::HttpError);
}

TEST_F(MockFred, EmptyResponses) {
  EXPECT_ERROR_KIND(client().fetch("EMPTY", "good", make_month(1959, 1), make_month(1959, 3)),
                    cc::ErrorKind::EmptyResponse);
  int before = requests_;
  EXPECT_ERROR_KIND(client().fetch("UNRATE", "good", make_month(1959, 3), make_month(1959, 1)),
                    cc::ErrorKind::EmptyResponse);
  EXPECT_EQ(requests_, before);
}

TEST(FredClient, UnreachableHostIsHttpError) {
  cc::FredClientOptions o;
  o.base_url = "http://127.0.0.1:1";
  o.cache_dir = cc::testing::scratch_dir("fred_unreachable");
  o.timeout_seconds = 2;
  EXPECT_ERROR_KIND(cc::FredClient(o).fetch("UNRATE", "k", make_month(1959, 1), make_month(1959, 3)),
                    cc::ErrorKind::HttpError);
}

TEST(FredParse, MissingMarkerRejected) {
  std::string body = R"({"observations":[{"date":"1959-01-01","value":"6.0"},{"date":"1959-02-01","value":"."}]})";
  EXPECT_ERROR_KIND(cc::parse_fred_observations(body, "UNRATE"), cc::ErrorKind::MalformedRow);
  EXPECT_ERROR_KIND(cc::parse_fred_observations("not json", "UNRATE"), cc::ErrorKind::MalformedRow);
  EXPECT_ERROR_KIND(cc::parse_fred_observations(R"({"count":0})", "UNRATE"), cc::ErrorKind::EmptyResponse);
}
