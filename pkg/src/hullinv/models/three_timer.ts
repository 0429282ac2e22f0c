system three_timer {
  const m1: int = 3;
  const m2: int = 4;
  const m3: int = 5;
  const m4: int = 9;
  state t1: int;
  state t2: int;
  state t3: int;
  state to: int;
  input a: bool;
  input r: bool;
  input c1: bool;
  input c2: bool;
  input c3: bool;
  init: t1 = 0 and t2 = 0 and t3 = 0 and to = 0;
  trans: ite(c1, t1' = 0, ite(a and t1 < m1, t1' = t1 + 1, t1' = t1))
     and ite(c2, t2' = 0, ite(a and t2 < m2, t2' = t2 + 1, t2' = t2))
     and ite(c3, t3' = 0, ite(a and t3 < m3, t3' = t3 + 1, t3' = t3))
     and ite(r or c1 or c2 or c3, to' = 0, ite(a and to < m4 - 2, to' = to + 1, to' = to));
  property: to = m4 - 2 => t1 = m1 and t2 = m2 and t3 = m3;
}
