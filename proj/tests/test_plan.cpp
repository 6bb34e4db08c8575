#include <gtest/gtest.h>

#include "replan/domain.hpp"
#include "replan/executor.hpp"
#include "replan/plan.hpp"
#include "test_util.hpp"

using namespace replan;

namespace {

Literal lit(const std::string& pred, std::vector<std::string> args,
            bool positive = true) {
  std::vector<Term> terms;
  for (const auto& a : args) terms.push_back(Term::parse(a));
  return Literal(positive, pred, std::move(terms));
}

struct Fixture : ::testing::Test {
  Domain logistics;
  Problem single_goal;

  void SetUp() override {
    auto [d, p] = parse_domain_and_problem(
        testutil::read_data("domains/logistics.domain"),
        testutil::read_data("problems/fig-single-goal.problem"));
    logistics = d;
    single_goal = p;
  }

  static const Child* find_new_step(const std::vector<Child>& children,
                                    const std::string& schema) {
    for (const auto& c : children)
      if (c.decision.kind == DecisionKind::NewStep &&
          c.decision.schema == schema)
        return &c;
    return nullptr;
  }
  static const Child* find_new_link(const std::vector<Child>& children,
                                    StepId producer) {
    for (const auto& c : children)
      if (c.decision.kind == DecisionKind::NewLink &&
          c.decision.link.producer == producer)
        return &c;
    return nullptr;
  }

  // Refines the flaw the planner would select next.
  std::vector<Child> refine_top(const PartialPlan& plan,
                                RefineMode mode = RefineMode::Scratch) {
    std::vector<Flaw> flaws = detect_flaws(plan);
    EXPECT_FALSE(flaws.empty());
    return refine(plan, logistics, flaws.front(), mode);
  }
};

TEST_F(Fixture, NullPlanHasGoalOpenConditions) {
  PartialPlan p = make_null_plan(single_goal);
  ASSERT_EQ(p.open.size(), 1u);
  EXPECT_EQ(p.open[0].cond, lit("AT-OB", {"OB1", "l_d"}));
  EXPECT_EQ(p.open[0].consumer, kGoalStep);
  EXPECT_EQ(p.real_step_count(), 0u);
  EXPECT_EQ(p.effects.size(), single_goal.init.size());
  EXPECT_TRUE(p.links.empty());
  EXPECT_TRUE(check_consistency(p).ok());
}

TEST_F(Fixture, NullPlanWithoutGoalsIsFlawless) {
  Problem empty = single_goal;
  empty.goals.clear();
  PartialPlan p = make_null_plan(empty);
  EXPECT_TRUE(detect_flaws(p).empty());
}

TEST_F(Fixture, ThreeGoalsGiveThreeOpenConditions) {
  Problem p3 = single_goal;
  p3.goals = {lit("AT-OB", {"OB1", "l_d"}), lit("AT-OB", {"OB2", "l_d"}),
              lit("AT-OB", {"OB3", "l_d"})};
  EXPECT_EQ(make_null_plan(p3).open.size(), 3u);
}

TEST_F(Fixture, GoalEstablishersAreUnloadSchemasOnly) {
  // OB1 is not initially at l_d, so the only establishment options are new
  // UNLOAD steps; there is no link from the initial step in scratch mode.
  PartialPlan p = make_null_plan(single_goal);
  auto children = refine_top(p);
  ASSERT_EQ(children.size(), 2u);
  EXPECT_NE(find_new_step(children, "UNLOAD-TRUCK"), nullptr);
  EXPECT_NE(find_new_step(children, "UNLOAD-PLANE"), nullptr);
  EXPECT_EQ(find_new_link(children, kInitStep), nullptr);
}

TEST_F(Fixture, ExtensionModeMaterializesFailedInitLink) {
  PartialPlan p = make_null_plan(single_goal);
  auto children = refine_top(p, RefineMode::Extension);
  ASSERT_EQ(children.size(), 3u);
  const Child* doomed = find_new_link(children, kInitStep);
  ASSERT_NE(doomed, nullptr);
  EXPECT_TRUE(doomed->decision.failed_init_link);
  EXPECT_EQ(doomed->consistency.status,
            ConsistencyResult::Status::InitContradiction);
}

TEST_F(Fixture, DeadEndOpenConditionHasNoChildren) {
  Domain none;
  none.name = "empty";
  Problem p = single_goal;
  p.goals = {lit("UNREACHABLE", {"x"})};
  PartialPlan plan = make_null_plan(p);
  auto flaws = detect_flaws(plan);
  EXPECT_TRUE(refine(plan, none, flaws.front(), RefineMode::Scratch).empty());
  EXPECT_EQ(refine(plan, none, flaws.front(), RefineMode::Extension).size(),
            1u);
}

// Walks the canonical single-goal derivation and checks the structures the
// planner builds along the way.
struct Walkthrough : Fixture {
  PartialPlan plan;

  void take_new_step(const std::string& schema) {
    auto children = refine_top(plan);
    const Child* c = find_new_step(children, schema);
    ASSERT_NE(c, nullptr) << "no " << schema << " child";
    ASSERT_TRUE(c->consistency.ok());
    check_superset(plan, c->plan);
    plan = c->plan;
  }
  void take_new_link(StepId producer) {
    auto children = refine_top(plan);
    const Child* c = find_new_link(children, producer);
    ASSERT_NE(c, nullptr) << "no link child from " << step_name(producer);
    ASSERT_TRUE(c->consistency.ok());
    check_superset(plan, c->plan);
    plan = c->plan;
  }

  // Monotonicity: the child's constraint sets contain the parent's.
  static void check_superset(const PartialPlan& parent,
                             const PartialPlan& child) {
    ASSERT_GE(child.steps.size(), parent.steps.size());
    ASSERT_GE(child.links.size(), parent.links.size());
    for (size_t i = 0; i < parent.links.size(); ++i)
      EXPECT_EQ(child.links[i].serial, parent.links[i].serial);
    for (const auto& o : parent.orderings)
      EXPECT_TRUE(std::find(child.orderings.begin(), child.orderings.end(),
                            o) != child.orderings.end());
  }

  void run_to_solution() {
    plan = make_null_plan(single_goal);
    take_new_step("UNLOAD-PLANE");  // step 1
    take_new_step("FLY-PLANE");     // step 2
    take_new_step("FLY-PLANE");     // step 3
    take_new_link(kInitStep);       // plane initially at l_p
    take_new_link(kInitStep);       // l_i is an airport
    take_new_link(kInitStep);       // l_d is an airport
    take_new_step("LOAD-PLANE");    // step 4
    take_new_link(3);               // plane at l_i after the first flight
    // A threat appears now: the second flight deletes the plane position the
    // load consumes.
    std::vector<Flaw> flaws = detect_flaws(plan);
    ASSERT_FALSE(flaws.empty());
    ASSERT_EQ(flaws.front().kind, Flaw::Kind::Threat);
    const Threat& threat = flaws.front().threat;
    EXPECT_EQ(threat.link.producer, 3u);
    EXPECT_EQ(threat.link.consumer, 4u);
    EXPECT_EQ(threat.clobberer, 2u);
    EXPECT_EQ(plan.bindings.resolve(threat.link.cond),
              lit("AT-PL", {"PL1", "l_i"}));

    auto res = refine(plan, logistics, flaws.front());
    ASSERT_EQ(res.size(), 2u);
    ASSERT_EQ(res[0].decision.kind, DecisionKind::Promotion);
    ASSERT_EQ(res[1].decision.kind, DecisionKind::Demotion);
    EXPECT_TRUE(res[0].consistency.ok());
    EXPECT_EQ(res[1].consistency.status,
              ConsistencyResult::Status::OrderingCycle);
    plan = res[0].plan;

    take_new_link(kInitStep);  // package initially at l_i
    EXPECT_TRUE(detect_flaws(plan).empty());
  }
};

TEST_F(Walkthrough, ReachesFlawlessFourStepPlan) {
  run_to_solution();
  EXPECT_EQ(plan.real_step_count(), 4u);
  EXPECT_TRUE(check_consistency(plan).ok());
}

TEST_F(Walkthrough, ExtractionOrdersAndExecutes) {
  run_to_solution();
  std::vector<GroundAction> actions = extract_solution(plan, logistics);
  ASSERT_EQ(actions.size(), 4u);
  // Topological order of the step ids is 3, 4, 2, 1.
  EXPECT_EQ(actions[0].name, "FLY-PLANE");
  EXPECT_EQ(actions[1].name, "LOAD-PLANE");
  EXPECT_EQ(actions[2].name, "FLY-PLANE");
  EXPECT_EQ(actions[3].name, "UNLOAD-PLANE");
  State init(single_goal.init.begin(), single_goal.init.end());
  ExecutionResult r = execute(actions, init);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(entails(*r.final_state, single_goal.goals));
}

TEST_F(Walkthrough, LinkedConditionsNeverReturnToOpenList) {
  run_to_solution();
  EXPECT_TRUE(plan.open.empty());
  for (const CausalLink& l : plan.links) {
    for (const OpenCond& oc : plan.open) {
      EXPECT_FALSE(oc.consumer == l.consumer &&
                   plan.bindings.resolve(oc.cond) ==
                       plan.bindings.resolve(l.cond));
    }
  }
}

TEST_F(Walkthrough, EqualsConstraintsPruneSameAirportFlights) {
  // After both flights are in place, the only airport link candidate for the
  // first flight's destination is l_i: l_d and l_p are ruled out by the two
  // flights' inequality constraints.
  plan = make_null_plan(single_goal);
  take_new_step("UNLOAD-PLANE");
  take_new_step("FLY-PLANE");
  take_new_step("FLY-PLANE");
  take_new_link(kInitStep);
  auto children = refine_top(plan);
  size_t init_links = 0;
  for (const auto& c : children)
    if (c.decision.kind == DecisionKind::NewLink &&
        c.decision.link.producer == kInitStep) {
      ++init_links;
      EXPECT_EQ(c.plan.bindings.resolve(c.decision.link.cond),
                lit("IS-A", {"AIRPORT", "l_i"}));
    }
  EXPECT_EQ(init_links, 1u);
}

TEST_F(Walkthrough, NewStepChildrenRecordLinkSiblings) {
  plan = make_null_plan(single_goal);
  take_new_step("UNLOAD-PLANE");
  take_new_step("FLY-PLANE");
  take_new_step("FLY-PLANE");
  take_new_link(kInitStep);
  take_new_link(kInitStep);
  take_new_link(kInitStep);
  take_new_step("LOAD-PLANE");
  // The load's plane-position condition can be linked from the initial state
  // or from either flight; a competing new flight records those siblings.
  auto children = refine_top(plan);
  const Child* fly = find_new_step(children, "FLY-PLANE");
  ASSERT_NE(fly, nullptr);
  EXPECT_GE(fly->decision.sibling_links.size(), 2u);
  for (const auto& c : children)
    if (c.decision.kind == DecisionKind::NewLink)
      EXPECT_TRUE(std::find(fly->decision.sibling_links.begin(),
                            fly->decision.sibling_links.end(),
                            link_fingerprint(
                                plan.step(c.decision.link.producer).schema,
                                c.decision.link.cond)) !=
                  fly->decision.sibling_links.end());
}

TEST_F(Fixture, ConsistencyNamesOrderingCycles) {
  PartialPlan p = make_null_plan(single_goal);
  auto children = refine_top(p);
  p = find_new_step(children, "UNLOAD-PLANE")->plan;
  p.orderings.push_back({kGoalStep, 1});
  ConsistencyResult r = check_consistency(p);
  EXPECT_EQ(r.status, ConsistencyResult::Status::OrderingCycle);
}

TEST_F(Fixture, ConsistencyNamesInitContradictions) {
  PartialPlan p = make_null_plan(single_goal);
  CausalLink bogus{p.next_link_serial++, kInitStep,
                   lit("AT-OB", {"OB2", "l_d"}), kGoalStep};
  p.links.push_back(bogus);
  ConsistencyResult r = check_consistency(p);
  ASSERT_EQ(r.status, ConsistencyResult::Status::InitContradiction);
  EXPECT_EQ(r.init_link.cond, lit("AT-OB", {"OB2", "l_d"}));
}

TEST_F(Fixture, CanonicalFormSeparatesSiblingRefinements) {
  PartialPlan p = make_null_plan(single_goal);
  auto children = refine_top(p);
  const Child* a = find_new_step(children, "UNLOAD-PLANE");
  const Child* b = find_new_step(children, "UNLOAD-TRUCK");
  ASSERT_NE(a, nullptr);
  ASSERT_NE(b, nullptr);
  EXPECT_NE(canonical_form(a->plan), canonical_form(b->plan));
  EXPECT_EQ(canonical_form(a->plan), canonical_form(a->plan));
}

}  // namespace
