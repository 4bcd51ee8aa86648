#include "kbp/corpus.hpp"

#include <stdexcept>
#include <vector>

namespace kbp::corpus {

namespace {

std::string child(int i) { return "Child" + std::to_string(i); }
std::string node(int i) { return "A" + std::to_string(i); }
std::string num(int i) { return std::to_string(i); }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

}  // namespace

std::string muddy(int n, bool clock_variant) {
    if (n < 2) throw std::invalid_argument("muddy children needs at least 2 children");
    const std::string obs = clock_variant ? "said" : "info";
    std::string s;
    s += clock_variant ? "-- Muddy children, " + num(n) + " children, clock version.\n"
                       : "-- Muddy children, " + num(n) + " children, perfect recall version.\n";
    s += "muddy: Bool[Agent]\n" + obs + ": Bool[Agent]\n\n";
    s += clock_variant ? "init_cond = (Exists x:Agent() (muddy[x])) /\\ Forall x:Agent() (neg said[x])\n\n"
                       : "init_cond = (Exists x:Agent() (muddy[x])) /\\ Forall x:Agent() (info[x] == muddy[x])\n\n";
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> args;
        if (clock_variant) {
            for (int d = 1; d < n; ++d) args.push_back("muddy[" + child((i + d) % n) + "]");
            for (int d = 0; d < n; ++d) args.push_back("said[" + child((i + d) % n) + "]");
        } else {
            for (int d = 1; d < n; ++d) args.push_back("info[" + child((i + d) % n) + "]");
        }
        s += "agent " + child(i) + " \"child\" ( " + join(args, ", ") + " )\n";
    }
    s += "\ntransitions\nbegin\n";
    std::vector<std::string> stores;
    for (int i = 0; i < n; ++i) stores.push_back(obs + "[" + child(i) + "] := " + child(i) + ".SayYes");
    s += join(stores, ";\n") + "\nend\n\n";
    std::vector<std::string> params;
    if (clock_variant) {
        for (int d = 1; d < n; ++d) params.push_back("muddy" + num(d) + ": observable Bool");
        for (int d = 0; d < n; ++d) params.push_back("said" + num(d) + ": observable Bool");
    } else {
        for (int d = 1; d < n; ++d) params.push_back("info" + num(d) + ": observable Bool");
    }
    s += "protocol \"child\" ( " + join(params, ", ") + " )\nbegin\n";
    std::vector<std::string> rounds(
        static_cast<std::size_t>(n),
        "if (Knows Self muddy[Self]) \\/ (Knows Self neg muddy[Self]) -> << SayYes >>\n[] otherwise -> skip fi");
    s += join(rounds, ";\n") + "\nend\n";
    return s;
}

std::string election(int n, int steps) {
    if (n < 2) throw std::invalid_argument("leader election needs at least 2 agents");
    if (steps < 1) throw std::invalid_argument("leader election needs at least 1 step");
    std::string s = "-- Presumed-leader election on a ring of " + num(n) + " agents with crash failures.\n";
    s += "type LeaderNum = 0.." + num(n) + "\n\n";
    s += "crashed : Bool[Agent]\nleader : LeaderNum\n";
    s += "-- one-message input buffer of each agent: original sender and content\n";
    s += "from : LeaderNum[Agent]\nmsg : LeaderNum[Agent]\n";
    s += "num : LeaderNum[Agent]\n";
    s += "-- scratch copy of the last agent's buffer while the ring shifts\n";
    s += "tf : LeaderNum\ntm : LeaderNum\n\n";

    std::vector<std::string> init;
    for (int i = 1; i <= n; ++i) init.push_back("neg crashed[" + node(i) + "]");
    init.push_back("leader == " + num(n));
    for (int i = 1; i <= n; ++i) {
        init.push_back("from[" + node(i) + "] == " + num(i));
        init.push_back("msg[" + node(i) + "] == 0");
        init.push_back("num[" + node(i) + "] == " + num(i));
    }
    init.push_back("tf == 0");
    init.push_back("tm == 0");
    s += "init_cond = " + join(init, " /\\ ") + "\n\n";

    for (int i = 1; i <= n; ++i) {
        std::string a = node(i);
        s += "agent " + a + " \"elect\" (crashed[" + a + "], num[" + a + "], from[" + a + "], msg[" + a + "])\n";
    }

    std::vector<std::string> tau;
    for (int i = 1; i <= n; ++i) tau.push_back("if true -> skip [] true -> crashed[" + node(i) + "] := true fi");
    {
        std::string lead = "if ";
        std::string alive_above;
        for (int j = n; j >= 1; --j) {
            lead += (j == n ? "" : "\n   [] ") + alive_above + "neg crashed[" + node(j) + "] -> leader := " + num(j);
            alive_above += "crashed[" + node(j) + "] /\\ ";
        }
        lead += "\n   [] otherwise -> leader := 0 fi";
        tau.push_back(lead);
    }
    tau.push_back("<< | tf := from[" + node(n) + "], tm := msg[" + node(n) + "] >>");
    auto deliver = [&](int sender, int receiver, const std::string& fwd_from, const std::string& fwd_msg) {
        std::string snd = node(sender);
        std::string rcv = node(receiver);
        std::string st = "if ";
        for (int j = n; j >= 1; --j) {
            st += (j == n ? "" : "\n   [] ") + std::string("neg crashed[") + snd + "] /\\ " + snd + ".Send" + num(j) +
                  " -> << | from[" + rcv + "] := " + num(sender) + ", msg[" + rcv + "] := " + num(j) + " >>";
        }
        st += "\n   [] crashed[" + snd + "] -> << | from[" + rcv + "] := " + fwd_from + ", msg[" + rcv + "] := " +
              fwd_msg + " >> fi";
        tau.push_back(st);
    };
    for (int r = n; r >= 2; --r) deliver(r - 1, r, "from[" + node(r - 1) + "]", "msg[" + node(r - 1) + "]");
    deliver(n, 1, "tf", "tm");
    tau.push_back("<< | tf := 0, tm := 0 >>");
    s += "\ntransitions\nbegin\n" + join(tau, ";\n") + "\nend\n\n";

    s += "protocol \"elect\" (crashed : Bool, my_num : observable LeaderNum,\n"
         "                 from_field : observable LeaderNum, message : observable LeaderNum)\n";
    s += "presumed : observable LeaderNum\n";
    s += "init_cond = presumed == " + num(n) + "\n";
    std::string round = "if ";
    std::string known;
    for (int j = n; j >= 1; --j) {
        round += (j == n ? "" : "\n[] ") + std::string("(neg crashed) /\\ ") + known + "neg Knows Self neg leader == " +
                 num(j) + " -> << Send" + num(j) + " | presumed := " + num(j) + " >>";
        known += "(Knows Self neg leader == " + num(j) + ") /\\ ";
    }
    round += "\n[] otherwise -> skip fi";
    s += "begin\n" + join(std::vector<std::string>(static_cast<std::size_t>(steps), round), ";\n") + "\nend\n";
    return s;
}

}  // namespace kbp::corpus
