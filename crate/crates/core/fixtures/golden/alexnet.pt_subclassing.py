# Generated by nnport 0.1.0: pt/subclassing -> pt/subclassing, pivot sha256 2cb77cacedfa626f568132aa40a7230abb40182bb8f3a8217cb3d99f4c0f4ba9
import torch
from torch import nn

INPUT_SHAPE = (32, 32, 3)
METRICS = ("accuracy",)
DATASETS = {
    "cifar10": ("data/cifar10", "classification", "images"),
    "svhn": ("data/svhn", "classification", "images"),
}


class AlexNet(nn.Module):
    def __init__(self):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels=3, out_channels=64, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv1_act = nn.ReLU()
        self.pool1 = nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))
        self.conv2 = nn.Conv2d(in_channels=64, out_channels=192, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv2_act = nn.ReLU()
        self.pool2 = nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))
        self.conv3 = nn.Conv2d(in_channels=192, out_channels=384, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv3_act = nn.ReLU()
        self.conv4 = nn.Conv2d(in_channels=384, out_channels=256, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv4_act = nn.ReLU()
        self.conv5 = nn.Conv2d(in_channels=256, out_channels=256, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv5_act = nn.ReLU()
        self.pool3 = nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))
        self.flatten = nn.Flatten()
        self.drop1 = nn.Dropout(p=0.5)
        self.fc1 = nn.Linear(in_features=4096, out_features=1024)
        self.fc1_act = nn.ReLU()
        self.drop2 = nn.Dropout(p=0.5)
        self.fc2 = nn.Linear(in_features=1024, out_features=512)
        self.fc2_act = nn.ReLU()
        self.drop3 = nn.Dropout(p=0.5)
        self.fc3 = nn.Linear(in_features=512, out_features=10)

    def forward(self, inputs):
        conv1 = self.conv1_act(self.conv1(inputs.permute(0, 3, 1, 2)))
        pool1 = self.pool1(conv1)
        conv2 = self.conv2_act(self.conv2(pool1))
        pool2 = self.pool2(conv2)
        conv3 = self.conv3_act(self.conv3(pool2))
        conv4 = self.conv4_act(self.conv4(conv3))
        conv5 = self.conv5_act(self.conv5(conv4))
        pool3 = self.pool3(conv5).permute(0, 2, 3, 1)
        flatten = self.flatten(pool3)
        drop1 = self.drop1(flatten)
        fc1 = self.fc1_act(self.fc1(drop1))
        drop2 = self.drop2(fc1)
        fc2 = self.fc2_act(self.fc2(drop2))
        drop3 = self.drop3(fc2)
        fc3 = self.fc3(drop3)
        return fc3


def make_loader(dataset):
    return torch.utils.data.DataLoader(dataset, batch_size=32, shuffle=True)


def train(model, loader):
    optimizer = torch.optim.Adam(model.parameters(), lr=0.001)
    criterion = nn.CrossEntropyLoss()
    for epoch in range(10):
        model.train()
        for x, y in loader:
            optimizer.zero_grad()
            loss = criterion(model(x), y)
            loss.backward()
            optimizer.step()
    return model
