system duplex_voter {
  const maxdev: real = 0.2;
  const bound: real = 0.4;
  state e1: real;
  state e2: real;
  input t: real;
  input i1: real;
  input i2: real;
  input cent: real;
  input vo: real;
  init: e1 = 0 and e2 = 0;
  trans: i1 - t <= maxdev and t - i1 <= maxdev
     and i2 - t <= maxdev and t - i2 <= maxdev
     and cent = ite(e1 <= e2, e1, e2)
     and vo = ite(i1 - e1 <= i2 - e2, i1 - e1, i2 - e2)
     and e1' = 0.9 * e1 + 0.05 * (i1 + (e1 - vo - cent))
     and e2' = 0.9 * e2 + 0.05 * (i2 + (e2 - vo - cent));
  property: -bound <= e1 and e1 <= bound and -bound <= e2 and e2 <= bound;
}
