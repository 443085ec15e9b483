/*
 * Copyright 2026 The edgetouch Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "edgetouch/error.hpp"
#include "edgetouch/plan.hpp"

using namespace edgetouch;
namespace fs = std::filesystem;

TEST_CASE("replication preset layout") {
  const ExperimentPlan plan = replication_plan("out", 2017);
  const std::vector<PlannedDataset> ds = expand_plan(plan);
  REQUIRE(ds.size() == 6);
  int train_grid = 0, test_random = 0, dark = 0;
  std::set<std::uint64_t> seeds;
  std::set<fs::path> paths;
  for (const PlannedDataset& d : ds) {
    train_grid += d.role == "train" && d.kind == "grid";
    test_random += d.role == "test" && d.kind == "random";
    dark += d.ambient_level == 0.0;
    seeds.insert(d.collect_seed);
    paths.insert(d.path);
    CHECK(d.path.parent_path() == fs::path("out"));
  }
  CHECK(train_grid == 4);
  CHECK(test_random == 2);
  CHECK(dark == 3);
  CHECK(seeds.size() == 6);
  CHECK(paths.size() == 6);
  REQUIRE(plan.noise_sigma.has_value());
  CHECK(*plan.noise_sigma == 0.25 / 1024.0);
  CHECK(plan_config(plan).noise_sigma == 0.25 / 1024.0);
}

TEST_CASE("plan files round-trip") {
  ExperimentPlan plan = replication_plan("results", 5);
  plan.rays_per_state = 1234;
  plan.schedule.depth_jitter = 0.01;
  const fs::path dir = fs::temp_directory_path() / "edgetouch_plan_test";
  fs::create_directories(dir);
  const fs::path file = dir / "p.plan";
  {
    std::ofstream out(file);
    out << format_plan(plan);
  }
  ExperimentPlan back = load_plan(file);
  CHECK(back.output_dir == dir / "results");
  back.output_dir = plan.output_dir;
  CHECK(format_plan(back) == format_plan(plan));
  CHECK(plan_config(back).emitters[3].rays_per_state == 1234);

  {
    std::ofstream out(file);
    out << "schema = edgetouch-plan-v1\nconfig = missing.cfg\n";
  }
  CHECK_THROWS_AS(plan_config(load_plan(file)), Error);
  {
    std::ofstream out(file);
    out << "schema = something-else\n";
  }
  try {
    load_plan(file);
    FAIL("accepted a foreign schema");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
  }
  fs::remove_all(dir);
}
