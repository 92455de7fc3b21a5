#include "hwrom/formation/engine.hpp"

#include "hwrom/common/error.hpp"
#include "hwrom/common/hash.hpp"
#include "hwrom/org/snapshot.hpp"

#include <algorithm>
#include <set>

namespace hwrom::formation
{
    using org::TaskStatus;
    using nlohmann::json;
    using hwrom::to_string;
    using org::to_string;

    std::string_view to_string(WithdrawReason r)
    {
        switch (r)
        {
        case WithdrawReason::Unwilling: return "Unwilling";
        case WithdrawReason::EnvironmentChanged: return "EnvironmentChanged";
        case WithdrawReason::Failure: return "Failure";
        }
        return "Unwilling";
    }

    std::string_view to_string(Phase p)
    {
        switch (p)
        {
        case Phase::Idle: return "Idle";
        case Phase::Forming: return "Forming";
        case Phase::Formed: return "Formed";
        case Phase::Completed: return "Completed";
        case Phase::Failed: return "Failed";
        }
        return "Idle";
    }

    std::string_view to_string(Eligibility e)
    {
        switch (e)
        {
        case Eligibility::Eligible: return "Eligible";
        case Eligibility::Unavailable: return "Unavailable";
        case Eligibility::Locked: return "Locked";
        case Eligibility::Affiliated: return "Affiliated";
        case Eligibility::ParallelConflict: return "ParallelConflict";
        case Eligibility::Incapable: return "Incapable";
        }
        return "Unavailable";
    }

    std::string_view event_name(const Event& ev)
    {
        struct Namer
        {
            std::string_view operator()(const TaskArrived&) const { return "TaskArrived"; }
            std::string_view operator()(const AnnouncementReceived&) const { return "AnnouncementReceived"; }
            std::string_view operator()(const BidSubmitted&) const { return "BidSubmitted"; }
            std::string_view operator()(const AuctionClosed&) const { return "AuctionClosed"; }
            std::string_view operator()(const TaskCompleted&) const { return "TaskCompleted"; }
            std::string_view operator()(const RobotWithdrew&) const { return "RobotWithdrew"; }
            std::string_view operator()(const RobotFailed&) const { return "RobotFailed"; }
            std::string_view operator()(const RobotJoined&) const { return "RobotJoined"; }
            std::string_view operator()(const TickEvent&) const { return "Tick"; }
        };
        return std::visit(Namer{}, ev);
    }

    FormationState initial_state(const std::vector<org::CooperativeRobot>& robots)
    {
        FormationState s;
        for (const auto& r : robots)
        {
            if (!s.robots.emplace(r.id, RobotEntry{r, true, false}).second)
            {
                throw Error(Errc::DuplicateRobotId, r.id.str());
            }
        }
        return s;
    }

    std::vector<org::CapabilityRequirement> role_requirements(const FormationState& state, const TaskId& task)
    {
        const TaskRecord& rec = state.tasks.at(task);
        auto reqs = rec.spec.required_capabilities;
        if (rec.composite() || !rec.parent)
        {
            for (auto kind : {org::CapabilityKind::Organization, org::CapabilityKind::Communication})
            {
                const bool present =
                    std::any_of(reqs.begin(), reqs.end(), [&](const auto& r) { return r.kind == kind; });
                if (!present)
                {
                    reqs.push_back({kind, "", Rational(1)});
                }
            }
        }
        return reqs;
    }

    namespace
    {
        bool is_ancestor_or_self(const FormationState& s, const TaskId& maybe_ancestor, std::optional<TaskId> t)
        {
            while (t)
            {
                if (*t == maybe_ancestor)
                {
                    return true;
                }
                t = s.tasks.at(*t).parent;
            }
            return false;
        }

        std::vector<TaskId> subtree(const FormationState& s, const TaskId& top)
        {
            std::vector<TaskId> out{top};
            for (std::size_t i = 0; i < out.size(); ++i)
            {
                for (const auto& c : s.tasks.at(out[i]).children)
                {
                    out.push_back(c);
                }
            }
            return out;
        }

        std::optional<RobotId> auctioneer_of(const FormationState& s, const TaskId& task)
        {
            const TaskRecord& rec = s.tasks.at(task);
            if (!rec.parent)
            {
                return kEnvironment;
            }
            const TaskRecord& parent = s.tasks.at(*rec.parent);
            if (parent.status != TaskStatus::Assigned || !parent.holder)
            {
                return std::nullopt;
            }
            auto it = s.robots.find(*parent.holder);
            if (it == s.robots.end() || !it->second.available())
            {
                return std::nullopt;
            }
            return parent.holder;
        }

        // Earliest tick of a still-open execution win, if any.
        std::optional<Tick> open_lock_since(const rules::AuctionHistory& history, const RobotId& robot)
        {
            std::map<TaskId, std::vector<Tick>> open;
            for (const auto& e : history.entries())
            {
                if (e.robot != robot)
                {
                    continue;
                }
                if (e.kind == rules::HistoryKind::Win)
                {
                    if (e.execution)
                    {
                        open[e.task].push_back(e.tick);
                    }
                }
                else if (auto it = open.find(e.task); it != open.end() && !it->second.empty())
                {
                    it->second.erase(it->second.begin());
                }
            }
            std::optional<Tick> since;
            for (const auto& [task, ticks] : open)
            {
                for (Tick t : ticks)
                {
                    since = since ? std::min(*since, t) : t;
                }
            }
            return since;
        }

        org::TaskNode rebuild_tree(const FormationState& s, const TaskId& id)
        {
            const TaskRecord& rec = s.tasks.at(id);
            org::TaskNode node = rec.spec;
            node.status = rec.status;
            node.subtasks.clear();
            for (const auto& c : rec.children)
            {
                node.subtasks.push_back(rebuild_tree(s, c));
            }
            return node;
        }

        class Transition
        {
        public:
            Transition(FormationState& s, const Config& cfg, Effects& fx) : s_(s), cfg_(cfg), fx_(fx) {}

            void dispatch(const Event& ev)
            {
                std::visit([this](const auto& e) { on(e); }, ev);
                flush();
            }

            void on(const TaskArrived& e);
            void on(const AnnouncementReceived& e);
            void on(const BidSubmitted& e);
            void on(const AuctionClosed& e);
            void on(const TaskCompleted& e);
            void on(const RobotWithdrew& e) { withdraw(e.robot, e.reason); }
            void on(const RobotFailed& e) { withdraw(e.robot, WithdrawReason::Failure); }
            void on(const RobotJoined& e)
            {
                try
                {
                    join(e.robot);
                }
                catch (const Error& err)
                {
                    record("ProtocolViolation", std::nullopt, e.robot.id, std::nullopt,
                           {{"reason", std::string(errc_name(err.code()))}});
                }
            }
            void on(const TickEvent&) {}

            void withdraw(const RobotId& robot, WithdrawReason reason);
            void reelect(const TaskId& task);
            void join(const org::CooperativeRobot& robot);
            void flush();

        private:
            void record(std::string event, std::optional<TaskId> task, std::optional<RobotId> robot,
                        std::optional<int> round, json detail = json::object())
            {
                fx_.records.push_back({std::move(event), std::move(task), std::move(robot), round, std::move(detail)});
            }

            void send(const RobotId& from, const RobotId& to, std::string kind, json payload)
            {
                fx_.messages.push_back({from, to, std::move(kind), std::move(payload)});
            }

            bool available(const RobotId& r) const
            {
                if (r == kEnvironment)
                {
                    return true;
                }
                auto it = s_.robots.find(r);
                return it != s_.robots.end() && it->second.available();
            }

            std::set<RobotId> recipients(const TaskId& task, const RobotId& auctioneer) const;
            void announce(const TaskId& task);
            void award(const TaskId& task, const market::Bid& bid, const RobotId& auctioneer);
            bool backtrack();
            void reset_subtree(const TaskId& top, bool include_completed, std::string_view reason);
            bool apply_alternative(const TaskId& task);
            void mark_completed(const TaskId& task);
            void propagate_completion(std::optional<TaskId> task);
            void finish_mission();
            void fail(const TaskId& task);
            void flatten(const org::TaskNode& node, std::optional<TaskId> parent, int depth,
                         std::vector<TaskId>& order);

            FormationState& s_;
            const Config& cfg_;
            Effects& fx_;
        };

        void Transition::flatten(const org::TaskNode& node, std::optional<TaskId> parent, int depth,
                                 std::vector<TaskId>& order)
        {
            TaskRecord rec;
            rec.spec = node;
            rec.spec.subtasks.clear();
            rec.spec.status = TaskStatus::Unassigned;
            rec.parent = std::move(parent);
            rec.depth = depth;
            rec.reward = node.reward;
            for (const auto& sub : node.subtasks)
            {
                rec.children.push_back(sub.id);
            }
            s_.tasks[node.id] = std::move(rec);
            order.push_back(node.id);
            for (const auto& sub : node.subtasks)
            {
                flatten(sub, node.id, depth + 1, order);
            }
        }

        void Transition::on(const TaskArrived& e)
        {
            if (s_.phase == Phase::Forming || s_.phase == Phase::Formed)
            {
                record("ProtocolViolation", e.task.id, std::nullopt, std::nullopt,
                       {{"reason", "mission already active"}});
                return;
            }
            std::set<TaskId> ids;
            std::vector<const org::TaskNode*> stack{&e.task};
            while (!stack.empty())
            {
                const auto* n = stack.back();
                stack.pop_back();
                if (!ids.insert(n->id).second || n->id.empty())
                {
                    record("ProtocolViolation", n->id, std::nullopt, std::nullopt,
                           {{"reason", "duplicate or empty task id"}});
                    return;
                }
                for (const auto& sub : n->subtasks)
                {
                    stack.push_back(&sub);
                }
            }
            s_.tasks.clear();
            s_.task_order.clear();
            s_.decisions.clear();
            s_.active_auctions.clear();
            s_.failure.reset();
            flatten(e.task, std::nullopt, 0, s_.task_order);
            s_.root = e.task.id;
            s_.phase = Phase::Forming;
            record("TaskArrived", e.task.id, std::nullopt, std::nullopt,
                   {{"tasks", s_.task_order.size()}, {"reward", to_string(e.task.reward)}});
            if (e.organizer && available(*e.organizer))
            {
                TaskRecord& rec = s_.tasks.at(e.task.id);
                rec.status = TaskStatus::Assigned;
                rec.holder = *e.organizer;
                rec.award_id = s_.next_award++;
                s_.history.record_win(*e.organizer, e.task.id, s_.now, !rec.composite());
                record("Award", e.task.id, *e.organizer, 0,
                       {{"price", "0"}, {"execution", !rec.composite()}, {"elected", true}});
            }
        }

        std::set<RobotId> Transition::recipients(const TaskId& task, const RobotId& auctioneer) const
        {
            std::set<RobotId> out;
            std::set<RobotId> affiliated;
            for (const auto& [id, rec] : s_.tasks)
            {
                if (rec.holder && (rec.status == TaskStatus::Assigned || rec.status == TaskStatus::Completed))
                {
                    affiliated.insert(*rec.holder);
                }
            }
            if (auctioneer == kEnvironment)
            {
                for (const auto& [id, entry] : s_.robots)
                {
                    if (entry.available())
                    {
                        out.insert(id);
                    }
                }
                return out;
            }
            out.insert(auctioneer);
            for (const auto& [id, entry] : s_.robots)
            {
                if (entry.available() && !affiliated.count(id))
                {
                    out.insert(id);
                }
            }
            const TaskRecord& rec = s_.tasks.at(task);
            if (rec.parent)
            {
                for (const auto& sib : s_.tasks.at(*rec.parent).children)
                {
                    const auto& h = s_.tasks.at(sib).holder;
                    if (h && available(*h))
                    {
                        out.insert(*h);
                    }
                }
            }
            return out;
        }

        void Transition::announce(const TaskId& task)
        {
            TaskRecord& rec = s_.tasks.at(task);
            const RobotId auctioneer = *auctioneer_of(s_, task);
            market::Announcement ann;
            ann.id_task = task;
            ann.reward = rec.reward;
            ann.required_capabilities = role_requirements(s_, task);
            ann.round = rec.round;
            ann.deadline = s_.now + cfg_.deadline_ticks;
            ann.auctioneer = auctioneer;
            ann.epoch = s_.next_epoch++;
            rec.status = TaskStatus::Announced;

            const auto targets = recipients(task, auctioneer);
            json to = json::array();
            for (const auto& r : targets)
            {
                to.push_back(r.str());
            }
            record("Announce", task, auctioneer, ann.round,
                   {{"reward", to_string(ann.reward)},
                    {"deadline", ann.deadline},
                    {"epoch", ann.epoch},
                    {"recipients", to}});
            const json payload = market::to_json(ann);
            for (const auto& r : targets)
            {
                send(auctioneer, r, "announce", payload);
            }
            fx_.timers.push_back({ann.deadline, AuctionClosed{task, ann.epoch}});
            s_.active_auctions[task] = OpenAuction{std::move(ann), {}};
        }

        void Transition::on(const AnnouncementReceived& e)
        {
            auto it = s_.active_auctions.find(e.announcement.id_task);
            if (it == s_.active_auctions.end() || it->second.announcement.epoch != e.announcement.epoch)
            {
                return;
            }
            if (eligibility(s_, e.robot, e.announcement.id_task, cfg_) != Eligibility::Eligible)
            {
                return;
            }
            const RobotEntry& entry = s_.robots.at(e.robot);
            const TaskRecord& rec = s_.tasks.at(e.announcement.id_task);
            market::ScenarioContext ctx;
            ctx.policy = cfg_.policy;
            ctx.now = s_.now;
            ctx.history = cfg_.rules.contains(rules::Predicate::WinnerLock) ? &s_.history : nullptr;
            if (cfg_.cost)
            {
                ctx.cost = cfg_.cost;
            }
            else
            {
                const Rational work = rec.spec.work;
                ctx.cost = [work](const org::CooperativeRobot& r, const market::Announcement& a) {
                    return market::generic_cost(r, a.required_capabilities, work);
                };
            }
            auto result = market::compute_bid(entry.robot, e.announcement, ctx);
            if (const auto* bid = std::get_if<market::Bid>(&result))
            {
                record("Bid", bid->id_task, bid->bidder, bid->round,
                       {{"price", to_string(bid->price)},
                        {"cost", to_string(bid->computed_cost)},
                        {"epoch", bid->epoch}});
                send(bid->bidder, e.announcement.auctioneer, "bid", market::to_json(*bid));
            }
        }

        void Transition::on(const BidSubmitted& e)
        {
            const auto& bid = e.bid;
            if (!s_.tasks.count(bid.id_task))
            {
                record("ProtocolViolation", bid.id_task, bid.bidder, bid.round, {{"reason", "bid for unknown task"}});
                return;
            }
            if (!s_.robots.count(bid.bidder))
            {
                record("ProtocolViolation", bid.id_task, bid.bidder, bid.round, {{"reason", "unknown bidder"}});
                return;
            }
            auto it = s_.active_auctions.find(bid.id_task);
            if (it == s_.active_auctions.end() || it->second.announcement.epoch != bid.epoch ||
                s_.now > it->second.announcement.deadline)
            {
                record("LateBid", bid.id_task, bid.bidder, bid.round, {{"price", to_string(bid.price)}});
                return;
            }
            if (cfg_.rules.contains(rules::Predicate::WinnerLock))
            {
                if (auto since = open_lock_since(s_.history, bid.bidder); since && *since < bid.sent_at)
                {
                    record("ProtocolViolation", bid.id_task, bid.bidder, bid.round,
                           {{"reason", "bid from locked robot"}});
                    return;
                }
            }
            record("BidAccepted", bid.id_task, bid.bidder, bid.round, {{"price", to_string(bid.price)}});
            it->second.bids.push_back(bid);
        }

        void Transition::on(const AuctionClosed& e)
        {
            auto it = s_.active_auctions.find(e.task);
            if (it == s_.active_auctions.end() || it->second.announcement.epoch != e.epoch)
            {
                return;
            }
            OpenAuction auction = std::move(it->second);
            s_.active_auctions.erase(it);
            TaskRecord& rec = s_.tasks.at(e.task);
            rec.status = TaskStatus::Unassigned;

            std::vector<market::Bid> candidates;
            for (const auto& b : auction.bids)
            {
                if (eligibility(s_, b.bidder, e.task, cfg_) == Eligibility::Eligible)
                {
                    candidates.push_back(b);
                }
            }
            auto ranked = market::rank_bids(std::move(candidates));
            record("AuctionClosed", e.task, auction.announcement.auctioneer, auction.announcement.round,
                   {{"bids", auction.bids.size()}, {"eligible", ranked.size()}});
            if (!ranked.empty())
            {
                s_.decisions.push_back(Decision{e.task, 0, ranked, 0});
                award(e.task, ranked.front(), auction.announcement.auctioneer);
                s_.decisions.back().award_id = s_.tasks.at(e.task).award_id;
                return;
            }

            auto adjustment = market::adjust_tactics(auction.announcement, cfg_.policy);
            if (auto* next = std::get_if<market::Announcement>(&adjustment))
            {
                rec.round = next->round;
                rec.reward = next->reward;
                record("Escalate", e.task, std::nullopt, rec.round, {{"reward", to_string(rec.reward)}});
            }
            else if (auto* redo = std::get_if<market::Redecompose>(&adjustment))
            {
                rec.round = redo->next.round;
                const bool applied = apply_alternative(e.task);
                record("Redecompose", e.task, std::nullopt, rec.round, {{"applied", applied}});
            }
            else
            {
                record("GiveUp", e.task, std::nullopt, auction.announcement.round);
                rec.round = 0;
                rec.reward = rec.spec.reward;
                if (!backtrack())
                {
                    fail(e.task);
                }
            }
        }

        void Transition::award(const TaskId& task, const market::Bid& bid, const RobotId& auctioneer)
        {
            TaskRecord& rec = s_.tasks.at(task);
            rec.status = TaskStatus::Assigned;
            rec.holder = bid.bidder;
            rec.price = bid.price;
            rec.award_id = s_.next_award++;
            rec.started = false;
            rec.exec_epoch = 0;
            const bool execution = !rec.composite();
            s_.history.record_win(bid.bidder, task, s_.now, execution);
            record("Award", task, bid.bidder, bid.round, {{"price", to_string(bid.price)}, {"execution", execution}});
            send(auctioneer, bid.bidder, "award", {{"task", task.str()}, {"price", to_string(bid.price)}});
        }

        void Transition::reset_subtree(const TaskId& top, bool include_completed, std::string_view reason)
        {
            for (const auto& t : subtree(s_, top))
            {
                TaskRecord& rec = s_.tasks.at(t);
                if (rec.status == TaskStatus::Completed && !include_completed)
                {
                    continue;
                }
                if (rec.status == TaskStatus::Announced)
                {
                    s_.active_auctions.erase(t);
                    record("Cancel", t, std::nullopt, rec.round, {{"reason", reason}});
                }
                if (rec.holder && (rec.status == TaskStatus::Assigned || rec.status == TaskStatus::Completed))
                {
                    if (rec.status == TaskStatus::Assigned)
                    {
                        s_.history.record_release(*rec.holder, t, s_.now);
                    }
                    record("Revoke", t, *rec.holder, rec.round, {{"reason", reason}});
                    if (available(*rec.holder))
                    {
                        const auto from = auctioneer_of(s_, t).value_or(kEnvironment);
                        send(from, *rec.holder, "revoke", {{"task", t.str()}});
                    }
                }
                rec.status = TaskStatus::Unassigned;
                rec.holder.reset();
                rec.price = 0;
                rec.round = 0;
                rec.reward = rec.spec.reward;
                rec.started = false;
                rec.exec_epoch = 0;
            }
        }

        bool Transition::backtrack()
        {
            while (!s_.decisions.empty())
            {
                Decision& d = s_.decisions.back();
                auto it = s_.tasks.find(d.task);
                if (it == s_.tasks.end() || it->second.award_id != d.award_id ||
                    it->second.status != TaskStatus::Assigned)
                {
                    s_.decisions.pop_back();
                    continue;
                }
                for (const auto& t : subtree(s_, d.task))
                {
                    if (s_.tasks.at(t).status == TaskStatus::Completed)
                    {
                        return false;
                    }
                }
                const TaskId task = d.task;
                // Bids in still-open auctions were collected under the state
                // being undone; restart them so freed robots can take part.
                std::vector<TaskId> open;
                for (const auto& [t, a] : s_.active_auctions)
                {
                    open.push_back(t);
                }
                for (const auto& t : open)
                {
                    reset_subtree(t, false, "backtrack");
                }
                reset_subtree(task, false, "backtrack");
                const auto auctioneer = auctioneer_of(s_, task);
                for (std::size_t i = d.chosen + 1; auctioneer && i < d.ranked.size(); ++i)
                {
                    if (eligibility(s_, d.ranked[i].bidder, task, cfg_) == Eligibility::Eligible)
                    {
                        d.chosen = i;
                        const market::Bid bid = d.ranked[i];
                        record("Reaward", task, bid.bidder, bid.round, {{"alternative", i}});
                        award(task, bid, *auctioneer);
                        s_.decisions.back().award_id = s_.tasks.at(task).award_id;
                        return true;
                    }
                }
                s_.decisions.pop_back();
            }
            return false;
        }

        bool Transition::apply_alternative(const TaskId& task)
        {
            TaskRecord& rec = s_.tasks.at(task);
            if (rec.spec.alternatives.empty())
            {
                return false;
            }
            std::vector<rules::FormingCandidate> candidates;
            for (std::size_t i = 0; i < rec.spec.alternatives.size(); ++i)
            {
                rules::FormingCandidate c;
                c.label = std::to_string(i);
                c.member_count = rec.spec.alternatives[i].size();
                for (const auto& t : rec.spec.alternatives[i])
                {
                    c.member_ids.push_back(t.id.str());
                }
                candidates.push_back(std::move(c));
            }
            const std::size_t pick = rules::forming_preference(candidates).front();
            std::vector<org::TaskNode> chosen = rec.spec.alternatives[pick];
            rec.spec.alternatives.erase(rec.spec.alternatives.begin() + static_cast<std::ptrdiff_t>(pick));
            for (const auto& t : chosen)
            {
                if (s_.tasks.count(t.id) && !is_ancestor_or_self(s_, task, s_.tasks.at(t.id).parent))
                {
                    return false;
                }
            }

            // Drop the previous decomposition below `task`.
            auto old = subtree(s_, task);
            old.erase(old.begin());
            for (const auto& t : old)
            {
                s_.active_auctions.erase(t);
                s_.tasks.erase(t);
            }
            std::erase_if(s_.task_order, [&](const TaskId& t) { return !s_.tasks.count(t); });

            TaskRecord& fresh = s_.tasks.at(task);
            fresh.children.clear();
            std::vector<TaskId> inserted;
            for (const auto& sub : chosen)
            {
                fresh.children.push_back(sub.id);
            }
            const int depth = fresh.depth;
            for (const auto& sub : chosen)
            {
                flatten(sub, task, depth + 1, inserted);
            }
            auto pos = std::find(s_.task_order.begin(), s_.task_order.end(), task);
            s_.task_order.insert(pos + 1, inserted.begin(), inserted.end());
            return true;
        }

        void Transition::fail(const TaskId& task)
        {
            s_.phase = Phase::Failed;
            s_.failure = "Unfillable: " + task.str();
            for (const auto& t : s_.task_order)
            {
                TaskRecord& rec = s_.tasks.at(t);
                if (rec.status == TaskStatus::Completed)
                {
                    continue;
                }
                if (rec.status == TaskStatus::Assigned && rec.holder)
                {
                    s_.history.record_release(*rec.holder, t, s_.now);
                    record("Release", t, *rec.holder, rec.round, {{"reason", "formation failed"}});
                }
                rec.status = TaskStatus::Failed;
            }
            s_.active_auctions.clear();
            record("FormationFailed", task, std::nullopt, std::nullopt, {{"reason", "Unfillable"}});
        }

        void Transition::mark_completed(const TaskId& task)
        {
            TaskRecord& rec = s_.tasks.at(task);
            rec.status = TaskStatus::Completed;
            if (rec.holder)
            {
                s_.history.record_completion(*rec.holder, task, s_.now);
                record("Completed", task, *rec.holder, rec.round);
                const auto boss = rec.parent ? s_.tasks.at(*rec.parent).holder : std::optional<RobotId>(kEnvironment);
                if (boss && available(*rec.holder) && available(*boss) && *boss != *rec.holder)
                {
                    send(*rec.holder, *boss, "done", {{"task", task.str()}});
                }
            }
            else
            {
                record("Completed", task, std::nullopt, rec.round, {{"unassigned", true}});
            }
        }

        void Transition::propagate_completion(std::optional<TaskId> task)
        {
            while (task)
            {
                TaskRecord& rec = s_.tasks.at(*task);
                if (rec.status == TaskStatus::Completed)
                {
                    task = rec.parent;
                    continue;
                }
                const bool done = std::all_of(rec.children.begin(), rec.children.end(), [&](const TaskId& c) {
                    return s_.tasks.at(c).status == TaskStatus::Completed;
                });
                if (!done || rec.status != TaskStatus::Assigned)
                {
                    return;
                }
                mark_completed(*task);
                task = rec.parent;
            }
        }

        void Transition::on(const TaskCompleted& e)
        {
            auto it = s_.tasks.find(e.task);
            if (it == s_.tasks.end())
            {
                record("ProtocolViolation", e.task, std::nullopt, std::nullopt,
                       {{"reason", "completion of unknown task"}});
                return;
            }
            if (s_.phase == Phase::Completed || s_.phase == Phase::Failed)
            {
                return;
            }
            if (e.exec_epoch == 0)
            {
                for (const auto& t : subtree(s_, e.task))
                {
                    TaskRecord& rec = s_.tasks.at(t);
                    if (rec.status == TaskStatus::Announced)
                    {
                        s_.active_auctions.erase(t);
                        record("Cancel", t, std::nullopt, rec.round, {{"reason", "completed"}});
                    }
                    if (rec.status != TaskStatus::Completed)
                    {
                        if (rec.status != TaskStatus::Assigned)
                        {
                            rec.holder.reset();
                        }
                        mark_completed(t);
                    }
                }
            }
            else
            {
                TaskRecord& rec = it->second;
                if (rec.status != TaskStatus::Assigned || rec.exec_epoch != e.exec_epoch)
                {
                    return;
                }
                mark_completed(e.task);
            }
            propagate_completion(s_.tasks.at(e.task).parent);
            if (s_.root && s_.tasks.at(*s_.root).status == TaskStatus::Completed)
            {
                finish_mission();
            }
        }

        void Transition::finish_mission()
        {
            s_.phase = Phase::Completed;
            s_.active_auctions.clear();
            ++s_.missions_completed;
            org::Organization org = organization(s_, cfg_);
            std::vector<org::Payout> payouts;
            for (const auto& t : s_.task_order)
            {
                const TaskRecord& rec = s_.tasks.at(t);
                if (rec.status != TaskStatus::Completed || !rec.holder)
                {
                    continue;
                }
                payouts.push_back({t, t == *s_.root ? rec.spec.reward : rec.price});
            }
            const auto deltas = org::settle_utilities(org, payouts);
            for (const auto& [robot, amount] : deltas)
            {
                s_.utilities[robot] += amount;
                record("Settle", std::nullopt, robot, std::nullopt, {{"amount", to_string(amount)}});
            }
            s_.settled = std::move(org);
            record("MissionComplete", s_.root, std::nullopt, std::nullopt,
                   {{"missions", s_.missions_completed}});
        }

        void Transition::withdraw(const RobotId& robot, WithdrawReason reason)
        {
            auto it = s_.robots.find(robot);
            if (it == s_.robots.end() || !it->second.available())
            {
                return;
            }
            if (reason == WithdrawReason::Failure)
            {
                it->second.alive = false;
            }
            else
            {
                it->second.withdrawn = true;
            }
            record(reason == WithdrawReason::Failure ? "RobotFailed" : "RobotWithdrew", std::nullopt, robot,
                   std::nullopt, {{"reason", to_string(reason)}});

            if (s_.phase != Phase::Forming && s_.phase != Phase::Formed)
            {
                return;
            }
            std::vector<TaskId> led;
            for (const auto& t : s_.task_order)
            {
                const TaskRecord& rec = s_.tasks.at(t);
                if (rec.holder == robot && rec.status == TaskStatus::Assigned && rec.composite())
                {
                    led.push_back(t);
                }
            }
            std::stable_sort(led.begin(), led.end(), [&](const TaskId& a, const TaskId& b) {
                return s_.tasks.at(a).depth > s_.tasks.at(b).depth;
            });
            for (const auto& t : led)
            {
                if (s_.tasks.count(t) && s_.tasks.at(t).holder == robot &&
                    s_.tasks.at(t).status == TaskStatus::Assigned)
                {
                    reelect(t);
                }
            }
            for (const auto& t : s_.task_order)
            {
                TaskRecord& rec = s_.tasks.at(t);
                if (rec.holder == robot && rec.status == TaskStatus::Assigned && !rec.composite())
                {
                    s_.history.record_release(robot, t, s_.now);
                    record("Release", t, robot, rec.round, {{"reason", to_string(reason)}});
                    rec.status = TaskStatus::Unassigned;
                    rec.holder.reset();
                    rec.price = 0;
                    rec.round = 0;
                    rec.reward = rec.spec.reward;
                    rec.started = false;
                    rec.exec_epoch = 0;
                }
            }
        }

        void Transition::reelect(const TaskId& task)
        {
            TaskRecord& rec = s_.tasks.at(task);
            const std::optional<RobotId> previous = rec.holder;
            std::set<RobotId> remaining;
            for (const auto& c : rec.children)
            {
                const auto& h = s_.tasks.at(c).holder;
                if (h && h != previous && available(*h))
                {
                    remaining.insert(*h);
                }
            }
            const auto reqs = role_requirements(s_, task);
            std::vector<market::Bid> bids;
            for (const auto& m : remaining)
            {
                const auto& robot = s_.robots.at(m).robot;
                auto cost = market::generic_cost(robot, reqs);
                if (!cost)
                {
                    continue;
                }
                const Rational price = *cost * (Rational(1) + cfg_.policy.margin);
                bids.push_back({m, task, price, *cost, 0, 0, s_.now});
                record("ElectionBid", task, m, std::nullopt, {{"price", to_string(price)}});
            }
            const auto winner = market::select_winner(bids);
            if (!winner)
            {
                json members = json::array();
                for (const auto& m : remaining)
                {
                    members.push_back(m.str());
                }
                record("Dissolve", task, previous, std::nullopt, {{"members", members}, {"forfeited_margin", "0"}});
                reset_subtree(task, true, "dissolve");
                return;
            }
            if (previous)
            {
                s_.history.record_release(*previous, task, s_.now);
            }
            rec.holder = *winner;
            rec.award_id = s_.next_award++;
            s_.history.record_win(*winner, task, s_.now, false);
            record("Reelect", task, *winner, std::nullopt,
                   {{"previous", previous ? json(previous->str()) : json(nullptr)}});
            for (const auto& c : rec.children)
            {
                TaskRecord& child = s_.tasks.at(c);
                if (child.status == TaskStatus::Announced)
                {
                    s_.active_auctions.erase(c);
                    child.status = TaskStatus::Unassigned;
                    record("Cancel", c, std::nullopt, child.round, {{"reason", "leader changed"}});
                }
            }
        }

        void Transition::join(const org::CooperativeRobot& robot)
        {
            if (robot.id == kEnvironment || s_.robots.count(robot.id))
            {
                throw Error(Errc::DuplicateRobotId, robot.id.str());
            }
            s_.robots.emplace(robot.id, RobotEntry{robot, true, false});
            record("RobotJoined", std::nullopt, robot.id, std::nullopt);
            for (const auto& [task, auction] : s_.active_auctions)
            {
                send(auction.announcement.auctioneer, robot.id, "announce", market::to_json(auction.announcement));
            }
        }

        void Transition::flush()
        {
            if (s_.phase == Phase::Forming || s_.phase == Phase::Formed)
            {
                for (const auto& t : s_.task_order)
                {
                    const TaskRecord& rec = s_.tasks.at(t);
                    if (rec.status != TaskStatus::Unassigned)
                    {
                        continue;
                    }
                    if (rec.parent && s_.tasks.at(*rec.parent).status != TaskStatus::Assigned)
                    {
                        continue;
                    }
                    if (auctioneer_of(s_, t))
                    {
                        announce(t);
                    }
                }
                const bool formed = std::all_of(s_.task_order.begin(), s_.task_order.end(), [&](const TaskId& t) {
                    const auto st = s_.tasks.at(t).status;
                    return st == TaskStatus::Assigned || st == TaskStatus::Completed;
                });
                if (formed && s_.phase == Phase::Forming)
                {
                    s_.phase = Phase::Formed;
                    record("Formed", s_.root, std::nullopt, std::nullopt,
                           {{"snapshot", org::snapshot_hash(organization(s_, cfg_))}});
                }
                else if (!formed && s_.phase == Phase::Formed)
                {
                    s_.phase = Phase::Forming;
                    record("Reforming", s_.root, std::nullopt, std::nullopt);
                }
                if (s_.phase == Phase::Formed)
                {
                    for (const auto& t : s_.task_order)
                    {
                        TaskRecord& rec = s_.tasks.at(t);
                        if (rec.status == TaskStatus::Assigned && !rec.composite() && !rec.started)
                        {
                            rec.started = true;
                            if (rec.spec.duration > 0)
                            {
                                rec.exec_epoch = s_.next_award++;
                                fx_.timers.push_back({s_.now + rec.spec.duration, TaskCompleted{t, rec.exec_epoch}});
                                record("Start", t, rec.holder, rec.round, {{"until", s_.now + rec.spec.duration}});
                            }
                        }
                    }
                }
            }
            s_.pending.clear();
            int level = 0;
            for (const auto& t : s_.task_order)
            {
                const TaskRecord& rec = s_.tasks.at(t);
                if (rec.status == TaskStatus::Unassigned)
                {
                    s_.pending.push_back(t);
                }
                else if (rec.status == TaskStatus::Announced)
                {
                    level = std::max(level, rec.depth);
                }
            }
            s_.level = level;
        }
    }

    Eligibility eligibility(const FormationState& state, const RobotId& robot, const TaskId& task,
                            const Config& cfg)
    {
        auto rit = state.robots.find(robot);
        auto tit = state.tasks.find(task);
        if (rit == state.robots.end() || !rit->second.available() || tit == state.tasks.end())
        {
            return Eligibility::Unavailable;
        }
        if (cfg.rules.contains(rules::Predicate::WinnerLock) && rules::winner_locked(state.history, robot, state.now))
        {
            return Eligibility::Locked;
        }
        const TaskRecord& rec = tit->second;
        const std::optional<RobotId> auctioneer =
            rec.parent ? state.tasks.at(*rec.parent).holder : std::optional<RobotId>(kEnvironment);

        std::vector<TaskId> held;
        for (const auto& t : state.task_order)
        {
            const TaskRecord& other = state.tasks.at(t);
            if (other.holder != robot ||
                (other.status != TaskStatus::Assigned && other.status != TaskStatus::Completed))
            {
                continue;
            }
            held.push_back(t);
            const bool own_chain = auctioneer == robot && rec.parent && is_ancestor_or_self(state, t, rec.parent);
            const bool finished_sibling = rec.parent && other.parent == rec.parent && !other.composite() &&
                                          other.status == TaskStatus::Completed;
            if (!own_chain && !finished_sibling)
            {
                return Eligibility::Affiliated;
            }
        }
        if (cfg.rules.contains(rules::Predicate::ParallelExclusion))
        {
            for (const auto& c : cfg.constraints)
            {
                if (c.kind != rules::ConstraintKind::Parallel)
                {
                    continue;
                }
                for (const auto& h : held)
                {
                    if (c.relates(h, task))
                    {
                        return Eligibility::ParallelConflict;
                    }
                }
            }
        }
        if (!rit->second.robot.dominates(role_requirements(state, task)))
        {
            return Eligibility::Incapable;
        }
        return Eligibility::Eligible;
    }

    std::map<TaskId, RobotId> holders(const FormationState& state)
    {
        std::map<TaskId, RobotId> out;
        for (const auto& [id, rec] : state.tasks)
        {
            if (rec.holder)
            {
                out.emplace(id, *rec.holder);
            }
        }
        return out;
    }

    namespace
    {
        org::OrgNode make_leaf(const FormationState& s, const RobotId& robot, const TaskId& team,
                               std::vector<TaskId> goals)
        {
            org::OrgNode leaf;
            leaf.id_ros = NodeId("L:" + robot.str() + "@" + team.str());
            leaf.id_robot = robot;
            leaf.goals = std::move(goals);
            if (auto it = s.robots.find(robot); it != s.robots.end())
            {
                leaf.rules = it->second.robot.rules;
            }
            leaf.rules.scope = rules::Scope::Local;
            return leaf;
        }

        org::OrgNode build_team(const FormationState& s, const Config& cfg, const TaskId& x);

        org::OrgNode build_member(const FormationState& s, const Config& cfg, const TaskId& team, const RobotId& r,
                                  const std::vector<TaskId>& tasks)
        {
            if (tasks.size() == 1 && s.tasks.at(tasks.front()).composite())
            {
                return build_team(s, cfg, tasks.front());
            }
            return make_leaf(s, r, team, tasks);
        }

        void renumber(org::OrgNode& node, int level, int pos)
        {
            node.level_i = level;
            node.pos_j = pos;
            for (std::size_t k = 0; k < node.children.size(); ++k)
            {
                renumber(node.children[k], level + 1, static_cast<int>(k));
            }
        }

        org::OrgNode build_team(const FormationState& s, const Config& cfg, const TaskId& x)
        {
            const TaskRecord& rec = s.tasks.at(x);
            org::OrgNode node;
            node.id_ros = NodeId("T:" + x.str());
            node.goals = {x};
            const bool bound = rec.holder && (rec.status == TaskStatus::Assigned || rec.status == TaskStatus::Completed);
            if (bound)
            {
                node.id_robot = rec.holder;
            }
            if (!rec.composite())
            {
                if (bound)
                {
                    if (auto it = s.robots.find(*rec.holder); it != s.robots.end())
                    {
                        node.rules = it->second.robot.rules;
                    }
                }
                node.rules.scope = rules::Scope::Local;
                return node;
            }
            if (!bound)
            {
                return node;
            }
            const RobotId leader = *rec.holder;
            std::vector<std::pair<RobotId, std::vector<TaskId>>> groups{{leader, {}}};
            for (const auto& c : rec.children)
            {
                const TaskRecord& child = s.tasks.at(c);
                if (!child.holder || (child.status != TaskStatus::Assigned && child.status != TaskStatus::Completed))
                {
                    continue;
                }
                auto g = std::find_if(groups.begin(), groups.end(), [&](const auto& p) { return p.first == *child.holder; });
                if (g == groups.end())
                {
                    groups.push_back({*child.holder, {c}});
                }
                else
                {
                    g->second.push_back(c);
                }
            }
            for (const auto& [robot, tasks] : groups)
            {
                node.children.push_back(build_member(s, cfg, x, robot, tasks));
            }
            node.rules = rules::whole_rules(node);
            for (const auto& c : cfg.constraints)
            {
                const bool a_in = std::find(rec.children.begin(), rec.children.end(), c.a) != rec.children.end();
                const bool b_in = std::find(rec.children.begin(), rec.children.end(), c.b) != rec.children.end();
                if (a_in && b_in)
                {
                    node.constraints.push_back(c);
                }
            }
            return node;
        }

        void collect_relations(const org::OrgNode& node, std::set<org::Relation>& out)
        {
            if (!node.leaf() && node.id_robot)
            {
                for (std::size_t k = 0; k < node.children.size(); ++k)
                {
                    const auto& child = node.children[k];
                    if (child.id_robot && *child.id_robot != *node.id_robot)
                    {
                        out.insert({*node.id_robot, *child.id_robot, org::RelationKind::Control});
                    }
                    for (std::size_t m = k + 1; k > 0 && m < node.children.size(); ++m)
                    {
                        const auto& a = node.children[k].id_robot;
                        const auto& b = node.children[m].id_robot;
                        if (a && b && *a != *b)
                        {
                            out.insert({std::min(*a, *b), std::max(*a, *b), org::RelationKind::Cooperation});
                        }
                    }
                }
            }
            for (const auto& child : node.children)
            {
                collect_relations(child, out);
            }
        }

        void collect_bound(const org::OrgNode& node, std::set<RobotId>& out)
        {
            if (node.id_robot)
            {
                out.insert(*node.id_robot);
            }
            for (const auto& c : node.children)
            {
                collect_bound(c, out);
            }
        }
    }

    org::Organization organization(const FormationState& state, const Config& cfg)
    {
        org::Organization o;
        if (state.root && state.tasks.count(*state.root))
        {
            o.root = build_team(state, cfg, *state.root);
            o.mission = rebuild_tree(state, *state.root);
        }
        else
        {
            o.root.id_ros = NodeId("society");
        }
        renumber(o.root, 0, 0);
        std::set<org::Relation> rel;
        collect_relations(o.root, rel);
        o.relations.assign(rel.begin(), rel.end());
        std::set<RobotId> bound;
        collect_bound(o.root, bound);
        for (const auto& [id, entry] : state.robots)
        {
            if (entry.available() || bound.count(id))
            {
                o.robots.push_back(entry.robot);
            }
        }
        for (const auto& [id, rec] : state.tasks)
        {
            if (rec.holder && (rec.status == TaskStatus::Assigned || rec.status == TaskStatus::Completed))
            {
                o.awards.emplace(id, org::Award{*rec.holder, rec.price});
            }
        }
        o.forming = state.phase == Phase::Forming || state.phase == Phase::Idle;
        return o;
    }

    std::string state_hash(const FormationState& s)
    {
        json j;
        j["now"] = s.now;
        j["phase"] = to_string(s.phase);
        j["level"] = s.level;
        json tasks = json::array();
        for (const auto& t : s.task_order)
        {
            const TaskRecord& r = s.tasks.at(t);
            tasks.push_back({t.str(), to_string(r.status), r.holder ? r.holder->str() : "", to_string(r.price),
                             to_string(r.reward), r.round, r.started});
        }
        j["tasks"] = tasks;
        json auctions = json::array();
        for (const auto& [t, a] : s.active_auctions)
        {
            json bids = json::array();
            for (const auto& b : a.bids)
            {
                bids.push_back({b.bidder.str(), to_string(b.price)});
            }
            auctions.push_back({t.str(), a.announcement.epoch, bids});
        }
        j["auctions"] = auctions;
        json robots = json::array();
        for (const auto& [id, e] : s.robots)
        {
            robots.push_back({id.str(), e.alive, e.withdrawn});
        }
        j["robots"] = robots;
        json decisions = json::array();
        for (const auto& d : s.decisions)
        {
            decisions.push_back({d.task.str(), d.chosen, d.ranked.size()});
        }
        j["decisions"] = decisions;
        json util = json::object();
        for (const auto& [r, u] : s.utilities)
        {
            util[r.str()] = to_string(u);
        }
        j["utilities"] = util;
        j["history"] = s.history.entries().size();
        return hex64(fnv1a64(j.dump()));
    }

    StepResult step(FormationState state, const Stamped& event, const Config& cfg)
    {
        if (state.started && (event.tick < state.now || (event.tick == state.now && event.seq <= state.last_seq)))
        {
            throw Error(Errc::ProtocolViolation, "event (" + std::to_string(event.tick) + "," +
                                                     std::to_string(event.seq) + ") out of order");
        }
        state.now = event.tick;
        state.last_seq = event.seq;
        state.started = true;
        Effects fx;
        Transition tr(state, cfg, fx);
        tr.dispatch(event.event);
        return {std::move(state), std::move(fx)};
    }

    StepResult handle_withdrawal(FormationState state, const RobotId& robot, WithdrawReason reason, const Config& cfg)
    {
        Effects fx;
        Transition tr(state, cfg, fx);
        tr.withdraw(robot, reason);
        tr.flush();
        return {std::move(state), std::move(fx)};
    }

    StepResult reelect_leader(FormationState state, const TaskId& node_task, const Config& cfg)
    {
        if (!state.tasks.count(node_task))
        {
            throw Error(Errc::UnknownTask, node_task.str());
        }
        Effects fx;
        Transition tr(state, cfg, fx);
        tr.reelect(node_task);
        tr.flush();
        return {std::move(state), std::move(fx)};
    }

    StepResult handle_join(FormationState state, const org::CooperativeRobot& robot, const Config& cfg)
    {
        Effects fx;
        Transition tr(state, cfg, fx);
        tr.join(robot);
        tr.flush();
        return {std::move(state), std::move(fx)};
    }
}
