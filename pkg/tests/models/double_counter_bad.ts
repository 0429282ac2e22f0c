system double_counter_bad {
  const nx: int = 10;
  const ny: int = 6;
  state x: int;
  state y: int;
  input a: bool;
  input b: bool;
  input c: bool;
  init: x = 0 and y = 0;
  trans: ite(b or c, x' = 0, ite(a and x < nx, x' = x + 1, x' = x)) and ite(c, y' = 0, ite(a and y < ny, y' = y + 1, y' = y));
  property: x = nx => y = 5;
}
