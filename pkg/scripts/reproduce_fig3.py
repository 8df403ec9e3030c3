"""Run the fig3 sweep, fit its windows, and write a gnuplot script."""

from _reproduce import main

if __name__ == "__main__":
    main("fig3")
