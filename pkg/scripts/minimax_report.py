"""Exact minimax exponents for each strategy set, with the active strategies at the optimum."""
from piltz.exponent_pairs import (bourgain_strategies, hypothesis_strategies, minimax_critical_exponent,
                                  minimax_grid, trudgian_yang_strategies)


def main():
    for make in (bourgain_strategies, trudgian_yang_strategies, hypothesis_strategies):
        s = make()
        rep = minimax_critical_exponent(s)
        grid, ga, gm = minimax_grid(s)
        print(f"{s.name}: value {rep.value} ~ {float(rep.value):.12f} at a={rep.a} m={rep.m} ({rep.region})")
        print(f"  theta = {rep.theta}, grid {grid:.12f} at a={ga:.9f} m={gm:.9f}")
        for label, v in sorted(rep.per_strategy.items(), key=lambda kv: -kv[1]):
            print(f"  {label:40s} {v}")


if __name__ == "__main__":
    main()
