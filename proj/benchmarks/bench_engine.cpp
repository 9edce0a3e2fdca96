#include "scenewright/animation.hpp"
#include "scenewright/context_library.hpp"
#include "scenewright/gateway/bench.hpp"
#include "scenewright/gateway/wire.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace scenewright;

void BM_EngineTick(benchmark::State& state) {
  Engine engine = gateway::make_synthetic_engine(static_cast<std::size_t>(state.range(0)), 3);
  nlohmann::json anims = nlohmann::json::array();
  const auto snap = engine.snapshot();
  for (std::size_t i = 0; i < snap.objects.size() && anims.size() < 20; ++i) {
    const auto& o = snap.objects[i].object;
    if (o.is_placeholder()) continue;
    anims.push_back({{"id", "spin-" + std::to_string(i)}, {"unit", "rotate"}, {"subject", o.name}, {"axis", "y"}});
  }
  engine.dispatch({TaskType::Animate, {{"animations", anims}}, ""});
  for (auto _ : state) benchmark::DoNotOptimize(engine.tick());
}
BENCHMARK(BM_EngineTick)->Arg(50)->Arg(200)->Arg(1000);

void BM_RetrieveOneProperty(benchmark::State& state) {
  const Engine engine = gateway::make_synthetic_engine(static_cast<std::size_t>(state.range(0)), 3);
  const std::vector<ContextCategory> request = {{CategoryKind::VirtualObjects, {Property::Position}}};
  for (auto _ : state) benchmark::DoNotOptimize(engine.retrieve(request, nullptr));
}
BENCHMARK(BM_RetrieveOneProperty)->Arg(50)->Arg(200)->Arg(1000);

void BM_RetrieveEverything(benchmark::State& state) {
  const Engine engine = gateway::make_synthetic_engine(static_cast<std::size_t>(state.range(0)), 3);
  const auto request = all_categories();
  for (auto _ : state) benchmark::DoNotOptimize(engine.retrieve(request, nullptr));
}
BENCHMARK(BM_RetrieveEverything)->Arg(50)->Arg(200)->Arg(1000);

void BM_SnapshotFrameRoundTrip(benchmark::State& state) {
  const Engine engine = gateway::make_synthetic_engine(static_cast<std::size_t>(state.range(0)), 3);
  gateway::WireMessage m;
  m.type = gateway::MessageType::Snapshot;
  m.session_id = "s1";
  m.sequence = 1;
  m.body = engine.snapshot().to_json();
  std::size_t bytes = 0;
  for (auto _ : state) {
    const std::string frame = gateway::encode_frame(m);
    bytes += frame.size();
    benchmark::DoNotOptimize(gateway::decode_frame(frame));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_SnapshotFrameRoundTrip)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
