"""Golden transcripts of the example programs.

Each session is a list of ``(input, expected)`` steps.  ``expected`` is the
exact console output, or ``None`` when the step is not checked (definitions
print nothing, so ``""`` is used when silence is the point).
"""

from __future__ import annotations

from calculist.session import Session


def show_range(hi: int, lo: int = 1) -> str:
    return "[ " + ", ".join(str(i) for i in range(hi, lo - 1, -1)) + " ]"


BASICS = [
    ("x=2+.1;    >> x *= 2;     >> ^x;", "4.2"),
    (">>x='A'+1=='B';    >> ^x;", "true"),
    ('>> y="Hello "+"Worl"+\'d\';   >>^y;', "Hello World"),
    (">> ^y[0:1]+'i'+y[5:];", "Hi World"),
    (">>/* checkpoint 1 */", ""),
    (">>fibe1(x,f2,f1,k) :  x==k?  f1: fibe1(x,f1,f1+f2,k+1); ", ""),
    (">>fibe(x) :  x <= 1?  x: fibe1(x,0,1,1);", ""),
    (">>z=fibe(10);", ""),
    (">>^z", "55"),
    (">>^z@type", "int"),
]

LIST_DEFS = [
    (">>member(x,L): L !=[] && (x==L[.] || member(x,L[>]));", ""),
    (">>listRev(L): L==[]? []: listRev(L[>])+[L[.]];", ""),
    (">>rev1(L,R): L==[]? R: rev1(L[>],[L[.]|R]);", ""),
    (">>rev(L): rev1(L,[]);", ""),
    (">>range(x1,x2): x1>x2? []: [x1|range(x1+1,x2)];", ""),
]

REVERSAL = LIST_DEFS + [
    (">>L1= range(1,1000); L2 = range(1,2000);", ""),
    (">>^listRev(L1);", show_range(1000)),
    (">> !clops;", None),
    (">>^listRev(L2);", show_range(2000)),
    (">> !clops;", None),
    (">>^rev(L1);", show_range(1000)),
    (">> !clops;", None),
    (">>^rev(L2);", show_range(2000)),
    (">> !clops;", None),
    (
        ">>merge(O1,O2): O1==[]? O2[:]:O2==[]? O1[:]: O1[.]<O2[.]? \n"
        "                [O1[.]|merge(O1[>], O2)]:  [O2[.]|merge(O1,O2[>])];",
        "",
    ),
    ("^merge([1,4,9],[2,3,10,11]);", "[ 1, 2, 3, 4, 9, 10, 11 ]"),
]

EMPS = (
    '>>emps = [ { "name": "e1", "age": 30 },\n'
    '           { "name": "e2", "age": 32, "projects": [ "p1", "p2" ] },\n'
    '           { "name": "e3", "age": 28, "projects": [ "p1", "p3" ] } ];'
)

EMPLOYEES = [
    (EMPS, ""),
    ('>>^emps[2]["projects"];', '[ "p1", "p3" ]'),
    ('>>^emps[0]["projects"] %', "null"),
    ('>>^emps[0]["projects"]', ""),
]

E2 = '{ "name": "e2", "age": 32, "projects": [ "p1", "p2" ] }'
E3 = '{ "name": "e3", "age": 28, "projects": [ "p1", "p3" ] }'

HIGHER_ORDER = [
    (">>map(L,f/1,m/1) : L==[]?[]: f(L[.])? [m(L[.])|map(L[>],f,m)]:  map(L[>],f,m);", ""),
    (">>d2or3(x) : x%2==0 || x%3==0;", ""),
    (">>^map(range(1,10),d2or3,lambda x: x*x*x);", "[ 8, 27, 64, 216, 512, 729, 1000 ]"),
    (">>reduce(L,f/2,init) : L==[]? init: f(L[.],reduce(L[>],f,init));", ""),
    (">>sum(x,y):x+y; >>prod(x,y):x*y;", ""),
    (">>^reduce(map(range(1,10),d2or3, lambda x: x*x*x),sum,0);", "2556"),
    (">>^reduce(map(range(1,10),lambda x:x%2==0&&x%3==0, lambda x: x*x),prod,1);", "36"),
    (
        ">>jsFilter(LJ,filtC/3,K,V): LJ==[]?[]:filtC(LJ[.],K,V)? \n"
        "    [LJ[.]|jsFilter(LJ[>],filtC,K,V)]: \n"
        "    jsFilter(LJ[>],filtC,K,V); ",
        "",
    ),
    (">>select1KV(J,K,V): J[K]!=null && J[K]==V; ", ""),
    ('>>^jsFilter(emps,select1KV,"age",28);', f"[ {E3} ]"),
    (">>select1KinV(J,K,V) : J[K]!=null && member(V,J[K]); ", ""),
    ('>>^jsFilter(emps,select1KinV,"projects","p1") ;', f"[ {E2}, {E3} ]"),
]

TWICE = [
    ("twice(f/1)/1: lambda x: f(f(x));", ""),
    ("^twice(lambda x: x+3)(7);", "13"),
]

ROTATE_DEF = "rotate(L,k): <n,k1> {! n=_len(L) !} n==0? []: {! k1=k%n !} L[n-k1:]+L[:n-k1];"

SORTING = [
    (ROTATE_DEF, ""),
    ("^rotate([5,1,4,20,15,13], 2);", "[ 15, 13, 5, 1, 4, 20 ]"),
    ("^rotate([5,1,4,20,15,13], 4);", "[ 4, 20, 15, 13, 5, 1 ]"),
    ("^rotate([5,1,4,20,15,13 ],-4);", "[ 15, 13, 5, 1, 4, 20 ]"),
    (
        ">>part1(x,L,o/2,T0,T1) : L==[]?[T0,T1]: o(L[.],x)? \n"
        "      part1(x,L[>],o,[L[.]|T0],T1):  part1(x,L[>],o,T0,[L[.]|T1]);",
        "",
    ),
    (">>part(x,L,o/2) : part1(x,L,o,[],[]);", ""),
    (
        ">>quicksort(L,o/2) : <T01> L==[]? []: L[>]==[]? [L[.]]: \n"
        "  {! T01=part(L[.],L[>],o) !} \n"
        "  quicksort(T01[0],o)+[L[.]|quicksort(T01[1],o)];",
        "",
    ),
    (">>^quicksort([3,11,2,8,6,5], lambda x,y: x<=y);", "[ 2, 3, 5, 6, 8, 11 ]"),
]

SIDE_EFFECTS = [
    (">>MATH: zeroD;  ", ""),
    (">>div*(x,y): <MATH*>  {! zeroD=false !} y==0 ? 0 {! zeroD=true !}:x/y; ", ""),
    (">>MATH1: numErr, somma;", ""),
    (
        ">> listDiv1*(x,L): <MATH*, MATH1*,d>  L==[]? []:  \n"
        "  {!d=div(x,L[.]) !} zeroD? {! numErr+=1 !}  ['*' |listDiv1(x,L[>])]: \n"
        "  [d | listDiv1(x,L[>])] {!  somma+=d !};",
        "",
    ),
    (">>listDiv*(x,L):  <MATH1*> {! numErr=0 !} {! somma=0 !} listDiv1(x,L);", ""),
    (">>^listDiv(4,[ 2, 0, -4, 0, 20 ]);", "[ 2.0, '*', -1.0, '*', 0.2 ]"),
    (">>^MATH1.numErr;", "2"),
    (">> ^MATH1.somma;", None),  # 1.2 up to rounding; checked numerically
    (">>swap*(L,i,j):  <t> true  {! t=L[i] !} {! L[i]=L[j] !} {! L[j]=t !}; ", ""),
    (">>K=[1,2,3,4];", ""),
    (">>^swap(K,1,3);", "true"),
    (">>^K;", "[ 1, 4, 3, 2 ]"),
]

TRIANG_DEFS = [
    (">>newVx_1(m,j) : j >=m? []: [0 | newVx_1(m,j+1)];", ""),
    (">>newVx(m) : m <= 0? []: newVx_1(m,0);", ""),
    (
        ">>triangLS_sum(A,X,i,j,n1): j>n1? 0:  \n"
        "           A[i][j]*X[j]+triangLS_sum(A,X,i,j+1,n1);                                  ",
        "",
    ),
    (
        '>>triangLS_1*(A,B,X,i,n1): i<0? X: A[i][i]==0? exc("matrix A singular"): \n'
        "   {! X[i]=(B[i]-triangLS_sum(A,X,i,i+1,n1))/A[i][i] !}  \n"
        "   triangLS_1(A,B,X,i-1,n1);",
        "",
    ),
    (
        ">>triangLS*(A,B): <n>{! n=_len(A) !} n!=_len(A[0])||n!=_len(B)? \n"
        '        exc("matrix A and vector B are not conformant"): \n'
        "        triangLS_1(A,B,newVx(n),n-1,n-1);",
        "",
    ),
]

TRIANG_QUERY = ">>^triangLS([[1,2,-1],[0,2,4],[0,0,-2]],[-6.5,3.0,-1.5]);"

TRIANG_FAST = [
    ("triangLS_sum(Ai,Xi): Xi==[]? 0: Ai[.]*Xi[.]+triangLS_sum(Ai[>],Xi[>]);", ""),
    (
        "triangLS_1*(A,B,X,i,n1) : <Ai,Xi> i<0? X: \n"
        "   {! Ai =i==0? A[i]: A[i][>i-1] !} {! Xi = i==0? X: X[>i-1] !}\n"
        '   Ai[0]==0? exc("matrix A is singular"): \n'
        "   {! Xi[0]=(B[i]-triangLS_sum(Ai[>],Xi[>]))/Ai[0] !}  \n"
        "   triangLS_1(A,B,X,i-1,n1);",
        "",
    ),
]

BONUS = [
    (
        '>>giveBonus*(emps,value):emps==[]?true:emps[.]["bonus"]==null? \n'
        '    {! emps[0]["bonus"]=value !} giveBonus(emps[>],value):\n'
        '    {! emps[0]["bonus"]+=value !} giveBonus(emps[>],value);',
        "",
    ),
    ('>>^giveBonus(jsFilter(emps,select1KinV,"projects","p1"),100);', "true"),
    (
        ">>^emps;",
        '[ { "name": "e1", "age": 30 }, '
        '{ "name": "e2", "age": 32, "projects": [ "p1", "p2" ], "bonus": 100 }, '
        '{ "name": "e3", "age": 28, "projects": [ "p1", "p3" ], "bonus": 100 } ]',
    ),
]

# Sessions in dependency order.  The higher-order queries need emps and the
# list definitions; the bonus update needs jsFilter.
SESSIONS = {
    "basics": BASICS,
    "reversal": REVERSAL,
    "json_queries": LIST_DEFS + EMPLOYEES + HIGHER_ORDER,
    "twice": TWICE,
    "sorting": SORTING,
    "side_effects": SIDE_EFFECTS,
    "triangular": TRIANG_DEFS + [(TRIANG_QUERY, "[ -5.75, 0.0, 0.75 ]")],
    "bonus": LIST_DEFS + EMPLOYEES + HIGHER_ORDER + BONUS,
}


def replay(steps, session: Session | None = None) -> tuple[Session, list[tuple[str, str | None, str]]]:
    """Run every step; return the session and (input, expected, actual)."""
    s = session or Session()
    results = []
    for text, expected in steps:
        results.append((text, expected, s.eval_input(text)))
    return s, results


def mismatches(results) -> list[str]:
    return [
        f"{text!r}: expected {exp!r}, got {got!r}"
        for text, exp, got in results
        if exp is not None and exp != got
    ]
