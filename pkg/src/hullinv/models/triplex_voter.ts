system triplex_voter {
  const maxdev: real = 0.2;
  const bound: real = 0.4;
  state e1: real;
  state e2: real;
  state e3: real;
  input t: real;
  input i1: real;
  input i2: real;
  input i3: real;
  input cent: real;
  input vo: real;
  init: e1 = 0 and e2 = 0 and e3 = 0;
  trans: i1 - t <= maxdev and t - i1 <= maxdev
     and i2 - t <= maxdev and t - i2 <= maxdev
     and i3 - t <= maxdev and t - i3 <= maxdev
     and cent = ite(e1 <= e2, ite(e2 <= e3, e2, ite(e1 <= e3, e3, e1)), ite(e1 <= e3, e1, ite(e2 <= e3, e3, e2)))
     and vo = ite(i1 - e1 <= i2 - e2, ite(i2 - e2 <= i3 - e3, i2 - e2, ite(i1 - e1 <= i3 - e3, i3 - e3, i1 - e1)), ite(i1 - e1 <= i3 - e3, i1 - e1, ite(i2 - e2 <= i3 - e3, i3 - e3, i2 - e2)))
     and e1' = 0.9 * e1 + 0.05 * (i1 + (e1 - vo - cent))
     and e2' = 0.9 * e2 + 0.05 * (i2 + (e2 - vo - cent))
     and e3' = 0.9 * e3 + 0.05 * (i3 + (e3 - vo - cent));
  property: -bound <= e1 and e1 <= bound and -bound <= e2 and e2 <= bound and -bound <= e3 and e3 <= bound;
}
