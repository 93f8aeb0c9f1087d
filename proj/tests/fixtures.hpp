#pragma once

#include <string>

#include "macdec/domains/warehouse.hpp"

namespace fixtures {

/// Two robots on the ring, one small and one large box.
inline macdec::WarehouseConfig mini_warehouse(macdec::Scenario scenario = macdec::Scenario::NoComm) {
  macdec::WarehouseConfig cfg;
  cfg.boxes = {{macdec::BoxSize::Small, 1}, {macdec::BoxSize::Large, 2}};
  cfg.scenario = scenario;
  return cfg;
}

/// Small and large box at depot 1, small box at depot 2.
inline macdec::WarehouseConfig three_box_warehouse() {
  macdec::WarehouseConfig cfg;
  cfg.boxes = {{macdec::BoxSize::Small, 1}, {macdec::BoxSize::Large, 1}, {macdec::BoxSize::Small, 2}};
  return cfg;
}

inline const char* kMinimalModel = R"(agents: 1
states: only
start: only
horizon: 3
discount: 1
actions[0]: go
observations[0]: see
T: go : only : only 1
O: go : only : see 1
R: go : only 1
)";

}  // namespace fixtures
