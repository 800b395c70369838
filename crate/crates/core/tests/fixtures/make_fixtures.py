"""Offline oracle: freezes RDKit results into JSON Lines fixtures."""
import json, os, sys
from rdkit import Chem, RDConfig, RDLogger
from rdkit.Chem import BRICS
RDLogger.DisableLog('rdApp.*')
fName=os.path.join(RDConfig.RDDataDir,'FunctionalGroups.txt')
groups=[]
for line in open(fName):
    if line.startswith('//') or not line.strip(): continue
    parts=[p for p in line.rstrip('\n').split('\t') if p.strip()]
    groups.append((parts[0].strip(),parts[1].strip(),parts[2].strip()))
pats=[(name,Chem.MolFromSmarts(s)) for _,s,name in groups]
ORD={Chem.BondType.SINGLE:'single',Chem.BondType.DOUBLE:'double',Chem.BondType.TRIPLE:'triple',Chem.BondType.AROMATIC:'aromatic'}
out=[]; seen=set()
for raw in open(sys.argv[1]):
    raw=raw.strip()
    if not raw: continue
    m=Chem.MolFromSmiles(raw)
    if m is None:
        print('skip',raw,file=sys.stderr); continue
    can=Chem.MolToSmiles(m)
    if can in seen: continue
    seen.add(can)
    m=Chem.MolFromSmiles(can)
    atoms=[dict(z=a.GetAtomicNum(),charge=a.GetFormalCharge(),aromatic=a.GetIsAromatic(),h=a.GetTotalNumHs(),ring=a.IsInRing()) for a in m.GetAtoms()]
    bonds=[dict(a=min(b.GetBeginAtomIdx(),b.GetEndAtomIdx()),b=max(b.GetBeginAtomIdx(),b.GetEndAtomIdx()),order=ORD[b.GetBondType()],ring=b.IsInRing()) for b in m.GetBonds()]
    fgsets={}
    for name,p in pats:
        if name=='???': continue
        ms=m.GetSubstructMatches(p,uniquify=False,maxMatches=100000)
        fgsets.setdefault(name,set()).update(frozenset(t[1:]) for t in ms)
    fg={k:len(v) for k,v in fgsets.items() if v}
    bb=sorted({tuple(sorted(b[0])) for b in BRICS.FindBRICSBonds(m)})
    em=Chem.RWMol(m)
    for a,b in bb: em.RemoveBond(a,b)
    frags=Chem.GetMolFrags(em.GetMol(),asMols=False,sanitizeFrags=False)
    frags=sorted([sorted(f) for f in frags], key=lambda f:f[0])
    out.append(dict(smiles=can,atoms=atoms,bonds=bonds,fg=fg,brics_bonds=[list(x) for x in bb],brics_frags=frags))
for o in out: print(json.dumps(o))
print(len(out),file=sys.stderr)
